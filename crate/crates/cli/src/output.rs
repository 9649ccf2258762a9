//! File emission: CSV fields and step histories, legacy VTK files on the
//! half-size grid, convergence tables and JSON documents.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use activeflux::cases::Model;
use activeflux::march::StepReport;
use activeflux::runner::{primitives, ConvergenceRow, DofRecord, Snapshot};

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn primitive_cells(model: Model, r: &DofRecord) -> Option<[f64; 4]> {
    primitives(model, &r.values).map(|(rho, v, p)| [rho, v[0], v[1], p])
}

/// One row per DoF. 1D: `avg` rows then `point` rows.
pub fn write_snapshot_csv(path: &Path, s: &Snapshot, model: Model) -> Result<()> {
    let mut w = create(path)?;
    let euler = matches!(model, Model::Euler { .. });
    let has_exact = s.records.iter().any(|r| r.exact.is_some());
    let mut head: Vec<String> = if s.dim == 1 {
        vec!["kind".into(), "i".into(), "x".into()]
    } else {
        ["kind", "i", "j", "ih", "jh", "x", "y", "active"].iter().map(|v| v.to_string()).collect()
    };
    head.extend(s.components.iter().cloned());
    if euler {
        head.extend(["density", "velocity_x", "velocity_y", "pressure"].iter().map(|v| v.to_string()));
    }
    if s.dim == 2 {
        head.push("theta".into());
    }
    if has_exact {
        head.extend(s.components.iter().map(|c| format!("exact_{c}")));
    }
    writeln!(w, "{}", head.join(","))?;
    for r in &s.records {
        let mut row: Vec<String> = if s.dim == 1 {
            vec![r.kind.clone(), r.i.to_string(), num(r.x)]
        } else {
            vec![
                r.kind.clone(),
                r.i.to_string(),
                r.j.to_string(),
                r.ih.to_string(),
                r.jh.to_string(),
                num(r.x),
                num(r.y),
                u8::from(r.active).to_string(),
            ]
        };
        row.extend(r.values.iter().map(|&v| num(v)));
        if let Some(p) = primitive_cells(model, r) {
            row.extend(p.iter().map(|&v| num(v)));
        }
        if s.dim == 2 {
            row.push(num(r.theta.unwrap_or(1.0)));
        }
        if has_exact {
            match &r.exact {
                Some(e) => row.extend(e.iter().map(|&v| num(v))),
                None => row.extend(s.components.iter().map(|_| String::new())),
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII structured-points file on the grid of half the mesh size:
/// node `(ih, jh)` carries the DoF with those half-grid indices.
pub fn write_snapshot_vtk(path: &Path, s: &Snapshot, model: Model, x0: f64, y0: f64) -> Result<()> {
    anyhow::ensure!(s.dim == 2, "VTK output is only written for 2D cases");
    let (nx, ny) = (2 * s.cells[0] + 1, 2 * s.cells[1] + 1);
    let mut grid: Vec<Option<&DofRecord>> = vec![None; nx * ny];
    for r in &s.records {
        grid[r.jh as usize * nx + r.ih as usize] = Some(r);
    }
    let cells: Vec<&DofRecord> = grid.into_iter().map(|r| r.expect("every half-grid node holds one DoF")).collect();
    let mut w = create(path)?;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "activeflux t={}", num(s.t))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {nx} {ny} 1")?;
    writeln!(w, "ORIGIN {} {} 0", num(x0), num(y0))?;
    writeln!(w, "SPACING {} {} 1", num(0.5 * s.dx), num(0.5 * s.dy))?;
    writeln!(w, "POINT_DATA {}", nx * ny)?;
    let scalar = |w: &mut BufWriter<File>, name: &str, f: &dyn Fn(&DofRecord) -> f64| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for r in &cells {
            writeln!(w, "{}", num(f(r)))?;
        }
        Ok(())
    };
    for (c, name) in s.components.iter().enumerate() {
        scalar(&mut w, name, &|r| r.values[c])?;
    }
    if matches!(model, Model::Euler { .. }) {
        scalar(&mut w, "pressure", &|r| primitive_cells(model, r).map_or(f64::NAN, |p| p[3]))?;
        writeln!(w, "VECTORS velocity double")?;
        for r in &cells {
            let p = primitive_cells(model, r).unwrap_or([f64::NAN; 4]);
            writeln!(w, "{} {} 0", num(p[1]), num(p[2]))?;
        }
    }
    scalar(&mut w, "theta", &|r| r.theta.unwrap_or(1.0))?;
    scalar(&mut w, "active", &|r| f64::from(u8::from(r.active)))?;
    w.flush()?;
    Ok(())
}

pub fn write_steps_csv(path: &Path, steps: &[StepReport], components: &[String]) -> Result<()> {
    let mut w = create(path)?;
    let mut head: Vec<String> =
        ["step", "t", "dt", "halvings", "min_value", "max_value", "min_pressure"].iter().map(|v| v.to_string()).collect();
    head.extend(components.iter().map(|c| format!("total_{c}")));
    head.extend(["limited_interfaces", "limited_points", "sensor_active", "fixed_centers"].iter().map(|v| v.to_string()));
    writeln!(w, "{}", head.join(","))?;
    for s in steps {
        let mut row = vec![
            s.step.to_string(),
            num(s.t),
            num(s.dt),
            s.halvings.to_string(),
            num(s.summary.min_value),
            num(s.summary.max_value),
            s.summary.min_pressure.map(num).unwrap_or_default(),
        ];
        row.extend(s.summary.totals.iter().map(|&v| num(v)));
        row.extend([
            s.stats.limited_interfaces.to_string(),
            s.stats.limited_points.to_string(),
            s.stats.sensor_active.to_string(),
            s.stats.fixed_centers.to_string(),
        ]);
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow], components: &[String]) -> Result<()> {
    let mut w = create(path)?;
    let mut head = vec!["cells_x".to_string(), "cells_y".to_string()];
    head.extend(components.iter().map(|c| format!("l1_{c}")));
    head.extend(components.iter().map(|c| format!("eoc_{c}")));
    head.extend(["steps", "halvings", "wall_seconds"].iter().map(|v| v.to_string()));
    writeln!(w, "{}", head.join(","))?;
    for r in rows {
        let mut row = vec![r.cells[0].to_string(), r.cells[1].to_string()];
        row.extend(r.l1.iter().map(|&v| num(v)));
        row.extend(r.eoc.iter().map(|e| e.map(num).unwrap_or_default()));
        row.extend([r.steps.to_string(), r.halvings.to_string(), format!("{:.3}", r.wall_seconds)]);
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable convergence table.
pub fn format_convergence(rows: &[ConvergenceRow], components: &[String]) -> String {
    let mut out = format!("{:>10}", "mesh");
    for c in components {
        out += &format!(" {:>13} {:>6}", format!("l1 {c}"), "EOC");
    }
    out.push('\n');
    for r in rows {
        let mesh = if r.cells[1] > 1 { format!("{}x{}", r.cells[0], r.cells[1]) } else { r.cells[0].to_string() };
        out += &format!("{mesh:>10}");
        for (e, o) in r.l1.iter().zip(&r.eoc) {
            let o = o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            out += &format!(" {e:>13.4e} {o:>6}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
