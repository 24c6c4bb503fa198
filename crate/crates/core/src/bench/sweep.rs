//! Parameter sweeps from `key = value` configuration text.

use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::bench::runner::{run_case, CaseSpec, SolveReport, CSV_HEADER};
use crate::biot::Variant;
use crate::error::{BiotError, Result};
use crate::mesh::ProblemKind;
use crate::precond::PrecondId;

/// A grid of benchmark cases.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub problem: ProblemKind,
    /// `None` picks the variant matching each preconditioner id.
    pub variant: Option<Variant>,
    pub preconds: Vec<PrecondId>,
    pub inexact: Vec<bool>,
    /// Cells per side.
    pub ns: Vec<usize>,
    pub taus: Vec<f64>,
    pub nus: Vec<f64>,
    pub ks: Vec<f64>,
    pub k_jumps: Vec<Option<f64>>,
    pub tol: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Mandel2d,
            variant: None,
            preconds: Vec::new(),
            inexact: vec![false],
            ns: Vec::new(),
            taus: vec![0.01],
            nus: vec![0.0],
            ks: vec![1e-6],
            k_jumps: vec![None],
            tol: 1e-8,
            max_iter: 500,
            out: None,
            threads: 1,
        }
    }
}

/// Parses a mesh size given as `1/n` or as a decimal `h`.
pub fn parse_mesh_size(s: &str) -> Result<usize> {
    let s = s.trim();
    let bad = || BiotError::Parse(format!("invalid mesh size '{s}'"));
    if let Some(rest) = s.strip_prefix("1/") {
        let n: usize = rest.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        return Ok(n);
    }
    let h: f64 = s.parse().map_err(|_| bad())?;
    if !(h > 0.0 && h <= 1.0) {
        return Err(bad());
    }
    let n = (1.0 / h).round();
    if ((1.0 / n) - h).abs() > 1e-9 * h {
        return Err(bad());
    }
    Ok(n as usize)
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn float(s: &str) -> Result<f64> {
    s.parse().map_err(|_| BiotError::Parse(format!("invalid number '{s}'")))
}

fn boolean(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(BiotError::Parse(format!("invalid boolean '{s}'"))),
    }
}

impl SweepSpec {
    /// Reads `key = value` lines; `#` starts a comment. Lists are
    /// comma-separated; `inexact = both` runs exact and inexact variants.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BiotError::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let value = value.trim();
            match key.trim() {
                "problem" => spec.problem = value.parse()?,
                "variant" => spec.variant = Some(value.parse()?),
                "precond" => spec.preconds = list(value, |s| s.parse())?,
                "inexact" => {
                    spec.inexact = if value == "both" {
                        vec![false, true]
                    } else {
                        vec![boolean(value)?]
                    }
                }
                "h" => spec.ns = list(value, parse_mesh_size)?,
                "tau" => spec.taus = list(value, float)?,
                "nu" => spec.nus = list(value, float)?,
                "k" | "perm" => spec.ks = list(value, float)?,
                "k_jump" | "perm_jump" => {
                    spec.k_jumps = list(value, |s| if s == "none" { Ok(None) } else { float(s).map(Some) })?
                }
                "tol" => spec.tol = float(value)?,
                "max_iter" => {
                    spec.max_iter = value
                        .parse()
                        .map_err(|_| BiotError::Parse(format!("invalid max_iter '{value}'")))?
                }
                "out" => spec.out = Some(PathBuf::from(value)),
                "threads" => {
                    spec.threads = value
                        .parse()
                        .map_err(|_| BiotError::Parse(format!("invalid threads '{value}'")))?
                }
                other => return Err(BiotError::Parse(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(BiotError::InvalidParameter(format!("sweep has no {what} values")));
        if self.preconds.is_empty() {
            return empty("precond");
        }
        if self.ns.is_empty() {
            return empty("h");
        }
        if self.taus.is_empty() {
            return empty("tau");
        }
        if self.nus.is_empty() {
            return empty("nu");
        }
        if self.ks.is_empty() {
            return empty("k");
        }
        if self.k_jumps.is_empty() {
            return empty("k_jump");
        }
        if self.inexact.is_empty() {
            return empty("inexact");
        }
        Ok(())
    }

    /// Grid points in output order: preconditioner, exactness, τ, ν, k,
    /// jump, then mesh size.
    pub fn cases(&self) -> Vec<CaseSpec> {
        let mut out = Vec::new();
        for &p in &self.preconds {
            for &inexact in &self.inexact {
                for &tau in &self.taus {
                    for &nu in &self.nus {
                        for &k in &self.ks {
                            for &kj in &self.k_jumps {
                                for &n in &self.ns {
                                    let mut c = CaseSpec::new(self.problem, n, tau, p)
                                        .with_nu(nu)
                                        .with_k(k)
                                        .with_k_jump(kj)
                                        .with_inexact(inexact);
                                    if let Some(v) = self.variant {
                                        if (v == Variant::Eliminated) == p.eliminated {
                                            c = c.with_variant(v);
                                        }
                                    }
                                    c.tol = self.tol;
                                    c.max_iter = self.max_iter;
                                    out.push(c);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Rows of a finished sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub reports: Vec<SolveReport>,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }

    /// Max/min iteration ratio over converged rows, per preconditioner and
    /// exactness flag, in first-appearance order.
    pub fn iteration_ratios(&self) -> Vec<(String, bool, f64)> {
        let mut out: Vec<(String, bool, usize, usize)> = Vec::new();
        for r in self.reports.iter().filter(|r| r.converged && r.iterations > 0) {
            let name = r.case.precond.name();
            let it = r.iterations;
            match out.iter_mut().find(|e| e.0 == name && e.1 == r.case.inexact) {
                Some(e) => {
                    e.2 = e.2.min(it);
                    e.3 = e.3.max(it);
                }
                None => out.push((name, r.case.inexact, it, it)),
            }
        }
        out.into_iter().map(|(n, i, lo, hi)| (n, i, hi as f64 / lo as f64)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.reports {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    /// CSV text without the timing columns.
    pub fn csv_keys(&self) -> String {
        self.reports.iter().map(|r| r.csv_key() + "\n").collect()
    }
}

/// Runs every grid point; failures become non-converged rows and the sweep
/// continues. Rows keep grid order regardless of `spec.threads`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cases = spec.cases();
    let slots: Mutex<Vec<Option<SolveReport>>> = Mutex::new(vec![None; cases.len()]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= cases.len() {
            break;
        }
        let c = cases[i];
        let r = run_case(&c).unwrap_or_else(|e| SolveReport::failed(c, &e));
        slots.lock().expect("sweep slots")[i] = Some(r);
    };
    let threads = spec.threads.max(1).min(cases.len());
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(&work);
            }
        });
    }
    let reports = slots
        .into_inner()
        .expect("sweep slots")
        .into_iter()
        .map(|r| r.expect("every case ran"))
        .collect();
    Ok(SweepResult { reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_sizes() {
        assert_eq!(parse_mesh_size("1/64").unwrap(), 64);
        assert_eq!(parse_mesh_size("0.125").unwrap(), 8);
        assert!(parse_mesh_size("0.3").is_err());
        assert!(parse_mesh_size("1/0").is_err());
    }

    #[test]
    fn grid_cardinality() {
        let spec = SweepSpec::parse(
            "problem = mandel2d\nprecond = bl\nh = 1/8, 1/16, 1/32, 1/64, 1/128\ntau = 0.1,0.01,0.001,0.0001\n",
        )
        .unwrap();
        assert_eq!(spec.cases().len(), 20);
    }

    #[test]
    fn rejects_unknown_key_and_empty_grid() {
        assert!(SweepSpec::parse("precond = bl\nh = 1/8\ncolour = red\n").is_err());
        assert!(SweepSpec::parse("h = 1/8\n").is_err());
    }
}
