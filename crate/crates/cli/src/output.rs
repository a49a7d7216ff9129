//! CSV and JSON encodings shared by the commands.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use phantom_qaoa::optimize::AlphaSweepResult;
use serde::Serialize;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes through a temporary sibling file and a rename, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", path.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `# key=value` comment lines placed before a CSV header.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}

/// `alpha,best_value,approx_ratio,gamma_1..gamma_p,beta_1..beta_p,restart_index`.
pub fn sweep_csv(sweep: &AlphaSweepResult, max_cut: usize, provenance: &Provenance) -> String {
    let p = sweep.p;
    let mut out = provenance.header();
    out.push_str("alpha,best_value,approx_ratio");
    for i in 1..=p {
        write!(out, ",gamma_{i}").unwrap();
    }
    for i in 1..=p {
        write!(out, ",beta_{i}").unwrap();
    }
    out.push_str(",restart_index\n");
    for rec in &sweep.records {
        let r = &rec.result;
        let mut fields = vec![fmt_f64(rec.alpha), fmt_f64(r.value), fmt_f64(r.value / max_cut as f64)];
        fields.extend(r.gammas.iter().chain(&r.betas).map(|&x| fmt_f64(x)));
        fields.push(r.best_start.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Data lines of a CSV produced here, skipping `#` comments and the header.
pub fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for x in [0.75, 0.1 + 0.2, -std::f64::consts::PI, 1e-300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn statistics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(std_dev(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(std_dev(&[5.0]), 0.0);
    }

    #[test]
    fn provenance_lines_are_skipped() {
        let text = format!("{}a,b\n1,2\n", Provenance::new().with("seed", 3).header());
        assert!(text.starts_with("# seed=3\n"));
        assert_eq!(csv_rows(&text), vec![vec!["1".to_string(), "2".to_string()]]);
    }
}
