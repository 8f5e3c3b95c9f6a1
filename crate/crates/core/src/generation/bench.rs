use super::score::{score_record, GenerationRecord};
use super::GenerationError;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

pub const PROMPT_FILE: &str = "prompt.txt";
pub const ANALYSIS_FILE: &str = "analysis.txt";
pub const SPEC_FILE: &str = "spec.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkRow {
    pub model: String,
    pub analysis: u32,
    pub executable: u32,
    pub stl: u32,
    pub records: Vec<GenerationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkTable {
    /// One row per model, in lexicographic directory order.
    pub rows: Vec<BenchmarkRow>,
    /// Mechanisms scored per model.
    pub mechanisms: Vec<String>,
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<String>, GenerationError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| GenerationError::MissingFixture(format!("{}: {e}", dir.display())))?;
    let mut names = Vec::new();
    for e in entries {
        let e = e.map_err(|e| GenerationError::Io(e.to_string()))?;
        if e.path().is_dir() {
            names.push(e.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

fn read(path: &Path) -> Result<Vec<u8>, GenerationError> {
    std::fs::read(path)
        .map_err(|e| GenerationError::MissingFixture(format!("{}: {e}", path.display())))
}

/// Scores `dir/<model>/<mechanism>/{prompt.txt, analysis.txt, spec.json}`.
/// Every model must cover the same mechanisms; any gap is a
/// `MissingFixture`.
pub fn run_benchmark(dir: &Path) -> Result<BenchmarkTable, GenerationError> {
    let models = sorted_subdirs(dir)?;
    if models.is_empty() {
        return Err(GenerationError::MissingFixture(format!(
            "{}: no model directories",
            dir.display()
        )));
    }
    let mut all: BTreeSet<String> = BTreeSet::new();
    let mut per_model = Vec::with_capacity(models.len());
    for m in &models {
        let mechs = sorted_subdirs(&dir.join(m))?;
        all.extend(mechs.iter().cloned());
        per_model.push(mechs);
    }
    let mechanisms: Vec<String> = all.into_iter().collect();
    let mut rows = Vec::with_capacity(models.len());
    for (model, mechs) in models.iter().zip(&per_model) {
        if let Some(missing) = mechanisms.iter().find(|m| !mechs.contains(m)) {
            return Err(GenerationError::MissingFixture(format!(
                "{}",
                dir.join(model).join(missing).display()
            )));
        }
        let mut row = BenchmarkRow {
            model: model.clone(),
            analysis: 0,
            executable: 0,
            stl: 0,
            records: Vec::with_capacity(mechanisms.len()),
        };
        for mech in &mechanisms {
            let base = dir.join(model).join(mech);
            let prompt = String::from_utf8_lossy(&read(&base.join(PROMPT_FILE))?).into_owned();
            let analysis = String::from_utf8_lossy(&read(&base.join(ANALYSIS_FILE))?).into_owned();
            let document = read(&base.join(SPEC_FILE))?;
            let scores = score_record(&prompt, &analysis, &document);
            row.analysis += u32::from(scores.analysis);
            row.executable += u32::from(scores.executable);
            row.stl += u32::from(scores.stl);
            row.records.push(GenerationRecord {
                mechanism: mech.clone(),
                prompt,
                analysis,
                document,
                scores,
            });
        }
        rows.push(row);
    }
    Ok(BenchmarkTable { rows, mechanisms })
}

/// Columns: model, Analysis, Executable Code, Mechanism STL.
pub fn render_table(table: &BenchmarkTable) -> String {
    let width = table
        .rows
        .iter()
        .map(|r| r.model.len())
        .max()
        .unwrap_or(0)
        .max("Model".len());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$} | {:>8} | {:>15} | {:>13}",
        "Model", "Analysis", "Executable Code", "Mechanism STL"
    );
    let _ = writeln!(
        s,
        "{}-+-{}-+-{}-+-{}",
        "-".repeat(width),
        "-".repeat(8),
        "-".repeat(15),
        "-".repeat(13)
    );
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{:<width$} | {:>8} | {:>15} | {:>13}",
            r.model, r.analysis, r.executable, r.stl
        );
    }
    s
}
