use crate::chain::{AngleTable, RunSummary};
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

/// Per-step table: step, unknowns, iterations, cold iterations, newly
/// active and newly inactive nodes.
pub fn iteration_table(summary: &RunSummary) -> String {
    let mut s = String::new();
    writeln!(s, "{:>4} {:>8} {:>6} {:>6} {:>8} {:>10}", "step", "N", "its", "cold", "active", "(inactive)").unwrap();
    for st in &summary.steps {
        let cold = st.cold_iterations().map_or("-".to_string(), |c| c.to_string());
        let change = match &st.transfer {
            Some(t) => format!("{:>8} {:>10}", t.newly_active, format!("({})", t.newly_inactive)),
            None => format!("{:>8} {:>10}", "-", ""),
        };
        let flag = if st.converged() { "" } else { "  not converged" };
        writeln!(s, "{:>4} {:>8} {:>6} {:>6} {change}{flag}", st.step, st.n, st.report.iterations, cold).unwrap();
    }
    s
}

pub fn write_iterations_csv(summary: &RunSummary, mut out: impl Write) -> Result<()> {
    writeln!(out, "step,n,iterations,cold_iterations,newly_active,newly_inactive,recycle_dim,converged")?;
    for st in &summary.steps {
        let cold = st.cold_iterations().map_or(String::new(), |c| c.to_string());
        let (a, i) = st.transfer.as_ref().map_or((String::new(), String::new()), |t| (t.newly_active.to_string(), t.newly_inactive.to_string()));
        writeln!(out, "{},{},{},{cold},{a},{i},{},{}", st.step, st.n, st.report.iterations, st.recycle_dim, st.converged())?;
    }
    Ok(())
}

/// `index,eigenvalue,<space>...`; blank where a space has fewer angles.
pub fn write_angles_csv(t: &AngleTable, mut out: impl Write) -> Result<()> {
    let names: Vec<&str> = t.columns.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "index,eigenvalue,{}", names.join(","))?;
    let rows = t.columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0).max(t.eigenvalues.len());
    for r in 0..rows {
        let ev = t.eigenvalues.get(r).map_or(String::new(), |v| format!("{v:e}"));
        let cells: Vec<String> = t.columns.iter().map(|(_, c)| c.get(r).map_or(String::new(), |v| format!("{v:.8}"))).collect();
        writeln!(out, "{},{ev},{}", r + 1, cells.join(","))?;
    }
    Ok(())
}

/// Writes every CSV of a run and `summary.txt` into `dir`.
pub fn write_outputs(summary: &RunSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_iterations_csv(summary, create(dir, "iterations.csv")?)?;
    for st in &summary.steps {
        st.report.write_csv(create(dir, &format!("residuals_step{}.csv", st.step))?)?;
        if let Some(c) = &st.cold {
            c.write_csv(create(dir, &format!("cold_residuals_step{}.csv", st.step))?)?;
        }
        if let Some(t) = &st.transfer {
            t.write_csv(create(dir, &format!("transfer_step{}.csv", st.step))?)?;
        }
        if let Some(k) = &st.ks {
            k.write_csv(create(dir, &format!("ks_step{}.csv", st.step))?)?;
        }
    }
    for t in &summary.angles {
        write_angles_csv(t, create(dir, &format!("angles_step{}.csv", t.step))?)?;
    }
    let mut f = create(dir, "summary.txt")?;
    f.write_all(iteration_table(summary).as_bytes())?;
    Ok(())
}
