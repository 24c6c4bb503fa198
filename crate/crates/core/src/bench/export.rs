//! Matrix Market export of the assembled systems.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::biot::{BiotProblem, BiotSystem, Variant};
use crate::error::Result;
use crate::la::write_matrix_market;

/// Writes `<stem>.mtx`, `<stem>_rhs.txt` (one value per line) and
/// `<stem>.blocks`, a side-car listing the block partition, for one system.
pub fn export_system(sys: &BiotSystem, problem: &BiotProblem, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mtx = dir.join(format!("{stem}.mtx"));
    write_matrix_market(BufWriter::new(File::create(&mtx)?), &sys.matrix(), false)?;

    let rhs = dir.join(format!("{stem}_rhs.txt"));
    let mut w = BufWriter::new(File::create(&rhs)?);
    for v in sys.rhs(&problem.zero_state())? {
        writeln!(w, "{v:.17e}")?;
    }
    w.flush()?;

    let blocks = dir.join(format!("{stem}.blocks"));
    let mut w = BufWriter::new(File::create(&blocks)?);
    let c = sys.counts();
    writeln!(w, "variant {}", sys.variant.name())?;
    writeln!(w, "tau {}", sys.tau)?;
    let names: &[(&str, usize)] = match sys.variant {
        Variant::Eliminated => &[("linear", c.linear), ("pressure", c.pressure), ("flux", c.flux)],
        _ => &[
            ("bubble", c.bubble),
            ("linear", c.linear),
            ("pressure", c.pressure),
            ("flux", c.flux),
        ],
    };
    for (name, size) in names {
        writeln!(w, "block {name} {size}")?;
    }
    w.flush()?;
    Ok(vec![mtx, rhs, blocks])
}

/// Exports the full, diagonal-bubble and eliminated systems of `problem`.
pub fn export_all(problem: &BiotProblem, tau: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for v in [Variant::Full, Variant::DiagBubble, Variant::Eliminated] {
        let sys = BiotSystem::build(problem, tau, v)?;
        out.extend(export_system(&sys, problem, dir, v.name())?);
    }
    Ok(out)
}
