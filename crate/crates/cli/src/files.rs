//! Structure files, run reports and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use gpt_cloak::{Structure, Termination};
use serde::Deserialize;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// How a structure was produced; informational only.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
pub struct Metadata {
    pub order: Option<usize>,
    pub core: Option<String>,
    pub solver: Option<String>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct StructureFile {
    background: f64,
    radii: Vec<f64>,
    conductivities: Vec<f64>,
    #[serde(default)]
    metadata: Option<Metadata>,
}

fn float(v: f64) -> String {
    // exact round trip
    format!("{v:.16e}")
}

fn float_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| float(v)).collect();
    format!("[{}]", items.join(", "))
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

pub fn render_structure(structure: &Structure, metadata: Option<&Metadata>) -> String {
    let mut out = String::new();
    writeln!(out, "background = {}", float(structure.background())).unwrap();
    writeln!(out, "radii = {}", float_array(structure.radii())).unwrap();
    writeln!(
        out,
        "conductivities = {}",
        float_array(structure.conductivities())
    )
    .unwrap();
    if let Some(m) = metadata {
        out.push_str("\n[metadata]\n");
        if let Some(v) = m.order {
            writeln!(out, "order = {v}").unwrap();
        }
        if let Some(v) = &m.core {
            writeln!(out, "core = {}", quoted(v)).unwrap();
        }
        if let Some(v) = &m.solver {
            writeln!(out, "solver = {}", quoted(v)).unwrap();
        }
        if let Some(v) = m.converged {
            writeln!(out, "converged = {v}").unwrap();
        }
        if let Some(v) = m.iterations {
            writeln!(out, "iterations = {v}").unwrap();
        }
    }
    out
}

pub fn parse_structure(text: &str) -> Result<(Structure, Option<Metadata>)> {
    let file: StructureFile = toml::from_str(text).context("malformed structure file")?;
    let structure = Structure::new(file.radii, file.conductivities, file.background)
        .context("invalid structure")?;
    Ok((structure, file.metadata))
}

pub fn read_structure(path: &Path) -> Result<Structure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read structure file {}", path.display()))?;
    let (structure, _) =
        parse_structure(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(structure)
}

pub fn termination_label(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max-iterations",
        Termination::Stalled => "stalled",
    }
}

/// Design run summary written next to the structure.
pub struct RunReport<'a> {
    pub order: usize,
    pub core: &'a str,
    pub residual_form: &'a str,
    pub tolerance: f64,
    pub report: &'a gpt_cloak::DesignReport,
}

impl RunReport<'_> {
    pub fn render(&self) -> String {
        let r = self.report;
        let mut out = String::new();
        writeln!(out, "order = {}", self.order).unwrap();
        writeln!(out, "core = {}", quoted(self.core)).unwrap();
        writeln!(out, "residual_form = {}", quoted(self.residual_form)).unwrap();
        writeln!(out, "tolerance = {}", float(self.tolerance)).unwrap();
        writeln!(out, "converged = {}", r.converged).unwrap();
        writeln!(
            out,
            "termination = {}",
            quoted(termination_label(r.termination))
        )
        .unwrap();
        writeln!(out, "iterations = {}", r.iterations).unwrap();
        writeln!(out, "rank_deficient_steps = {}", r.rank_deficient_steps).unwrap();
        writeln!(out, "max_conductivity = {}", float(r.max_conductivity())).unwrap();
        writeln!(out, "min_conductivity = {}", float(r.min_conductivity())).unwrap();
        writeln!(out, "final_gpts = {}", float_array(&r.final_residuals)).unwrap();
        writeln!(
            out,
            "residual_history = {}",
            float_array(&r.residual_history)
        )
        .unwrap();
        out
    }
}
