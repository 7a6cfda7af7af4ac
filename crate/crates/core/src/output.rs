//! CSV and legacy VTK writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::assembly::{Discretization, P, PHI};
use crate::error::{Error, Result};
use crate::scenario::{RunOutput, StatsRow};

pub const STATS_HEADER: &str = "step,dofs,avg_lin,avg_cg,n_as,cod_max,tcv,e_bulk,e_crack,u_y_point";

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "-".into(),
    }
}

/// One CSV line of the stats table, without newline.
pub fn stats_line(r: &StatsRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.step,
        r.dofs,
        num(r.avg_lin),
        num(r.avg_cg),
        r.n_as.map_or("-".into(), |n| n.to_string()),
        num(r.cod_max),
        num(r.tcv),
        num(r.e_bulk),
        num(r.e_crack),
        num(r.u_y_point),
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_stats(path: &Path, rows: &[StatsRow]) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::from(STATS_HEADER);
    body.push('\n');
    for r in rows {
        body.push_str(&stats_line(r));
        body.push('\n');
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_cod_profile(path: &Path, profile: &[(f64, f64, f64)]) -> Result<()> {
    let mut body = String::from("x,cod,cod_ref\n");
    for &(x, c, r) in profile {
        body.push_str(&format!("{x:.16e},{c:.16e},{r:.16e}\n"));
    }
    let mut w = create(path)?;
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Legacy ASCII VTK on the Q1 vertices with point fields `u`, `p`, `phi`.
/// Hanging vertices carry their constrained values.
pub fn write_vtk(path: &Path, disc: &Discretization, x: &[f64]) -> Result<()> {
    let mesh = disc.mesh();
    let sd = disc.scalar_dofs();
    let ud = disc.u_dofs();
    let layout = disc.layout();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\npfmix fields\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {} double\n", sd.n_nodes()));
    for p in sd.node_coords() {
        s.push_str(&format!("{:.16e} {:.16e} 0\n", p[0], p[1]));
    }
    let nc = mesh.n_cells();
    s.push_str(&format!("CELLS {} {}\n", nc, 5 * nc));
    for c in 0..nc {
        let n = sd.cell_nodes(c);
        s.push_str(&format!("4 {} {} {} {}\n", n[0], n[1], n[2], n[3]));
    }
    s.push_str(&format!("CELL_TYPES {nc}\n"));
    for _ in 0..nc {
        s.push_str("9\n");
    }
    // u lives on the Q2 nodes; pick the value at each vertex
    let mut u_at = vec![[0.0; 2]; sd.n_nodes()];
    for c in 0..nc {
        let sn = sd.cell_nodes(c);
        let un = ud.cell_nodes(c);
        for k in 0..4 {
            u_at[sn[k]] = [x[2 * un[k]], x[2 * un[k] + 1]];
        }
    }
    s.push_str(&format!("POINT_DATA {}\nVECTORS u double\n", sd.n_nodes()));
    for u in &u_at {
        s.push_str(&format!("{:.16e} {:.16e} 0\n", u[0], u[1]));
    }
    for (name, field) in [("p", P), ("phi", PHI)] {
        s.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for v in &x[layout.range(field)] {
            s.push_str(&format!("{v:.16e}\n"));
        }
    }
    let mut w = create(path)?;
    w.write_all(s.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes `stats.csv`, `cod_profile.csv` (Sneddon runs) and `fields.vtk`
/// (final state) into `dir`.
pub fn write_run(dir: &Path, run: &RunOutput, vtk: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_stats(&dir.join("stats.csv"), &run.rows)?;
    if !run.cod_profile.is_empty() {
        write_cod_profile(&dir.join("cod_profile.csv"), &run.cod_profile)?;
    }
    if vtk {
        write_vtk(&dir.join("fields.vtk"), &run.disc, &run.x)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_values_print_dash() {
        let r = StatsRow {
            step: 3,
            dofs: 10,
            avg_lin: None,
            avg_cg: None,
            n_as: None,
            cod_max: None,
            tcv: None,
            e_bulk: None,
            e_crack: None,
            u_y_point: None,
        };
        assert_eq!(stats_line(&r), "3,10,-,-,-,-,-,-,-,-");
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = num(Some(0.1));
        let mantissa = s.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }
}
