//! CSV/JSON export of fields, sinograms and traces. Values are printed with
//! 17 significant digits so every f64 round-trips losslessly; files are
//! written atomically (temp file + rename).

use crate::coefficients::ScalarField;
use crate::scalar::{to_f64, Real};
use crate::transforms::{LineSet, Sinogram};
use crate::transport::{BoundaryTrace, RadianceField};
use std::fmt::Write as _;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,y[,z],value` rows over the grid nodes.
pub fn scalar_field_csv<T: Real>(field: &ScalarField<T>) -> String {
    let spec = field.spec();
    let planar = spec.is_planar();
    let mut out = String::new();
    out.push_str(if planar { "x,y,value\n" } else { "x,y,z,value\n" });
    for idx in 0..spec.n_nodes() {
        let p = spec.node(idx);
        let v = to_f64(field.values()[idx]);
        if planar {
            let _ = writeln!(out, "{},{},{}", fmt(to_f64(p.x)), fmt(to_f64(p.y)), fmt(v));
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt(to_f64(p.x)),
                fmt(to_f64(p.y)),
                fmt(to_f64(p.z)),
                fmt(v)
            );
        }
    }
    out
}

/// Sinogram rows `angle_index,offset_index,entry...,dir...,value`.
pub fn sinogram_csv<T: Real>(lines: &LineSet<T>, data: &Sinogram<T>) -> String {
    let planar = lines
        .lines()
        .first()
        .map(|l| to_f64(l.direction.z) == 0.0 && to_f64(l.entry.z) == 0.0)
        .unwrap_or(true);
    let mut out = String::new();
    out.push_str(if planar {
        "angle_index,offset_index,entry_x,entry_y,dir_x,dir_y,value\n"
    } else {
        "angle_index,offset_index,entry_x,entry_y,entry_z,dir_x,dir_y,dir_z,value\n"
    });
    for (line, v) in lines.lines().iter().zip(&data.values) {
        if planar {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                line.angle_index,
                line.offset_index,
                fmt(to_f64(line.entry.x)),
                fmt(to_f64(line.entry.y)),
                fmt(to_f64(line.direction.x)),
                fmt(to_f64(line.direction.y)),
                fmt(to_f64(*v))
            );
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                line.angle_index,
                line.offset_index,
                fmt(to_f64(line.entry.x)),
                fmt(to_f64(line.entry.y)),
                fmt(to_f64(line.entry.z)),
                fmt(to_f64(line.direction.x)),
                fmt(to_f64(line.direction.y)),
                fmt(to_f64(line.direction.z)),
                fmt(to_f64(*v))
            );
        }
    }
    out
}

/// Radiance samples `x,y[,z],dir...,value` over (node, direction) pairs.
pub fn radiance_csv<T: Real>(field: &RadianceField<T>) -> String {
    let spec = field.grid();
    let planar = spec.is_planar();
    let mut out = String::new();
    out.push_str(if planar {
        "x,y,dir_x,dir_y,value\n"
    } else {
        "x,y,z,dir_x,dir_y,dir_z,value\n"
    });
    for j in 0..field.angles().len() {
        let th = field.angles().direction(j);
        for idx in 0..spec.n_nodes() {
            let p = spec.node(idx);
            let v = to_f64(field.value(idx, j));
            if planar {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt(to_f64(p.x)),
                    fmt(to_f64(p.y)),
                    fmt(to_f64(th.x)),
                    fmt(to_f64(th.y)),
                    fmt(v)
                );
            } else {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt(to_f64(p.x)),
                    fmt(to_f64(p.y)),
                    fmt(to_f64(p.z)),
                    fmt(to_f64(th.x)),
                    fmt(to_f64(th.y)),
                    fmt(to_f64(th.z)),
                    fmt(v)
                );
            }
        }
    }
    out
}

/// Outflow trace samples `x,y[,z],dir...,xi_weight,value` (outflow pairs only).
pub fn trace_csv<T: Real>(trace: &BoundaryTrace<T>) -> String {
    let planar = trace
        .nodes()
        .first()
        .map(|n| to_f64(n.point.z) == 0.0)
        .unwrap_or(true);
    let mut out = String::new();
    out.push_str(if planar {
        "x,y,dir_x,dir_y,xi_weight,value\n"
    } else {
        "x,y,z,dir_x,dir_y,dir_z,xi_weight,value\n"
    });
    for j in 0..trace.angles().len() {
        let th = trace.angles().direction(j);
        for b in 0..trace.nodes().len() {
            if trace.classify(b, j) != crate::geometry::BoundaryClass::Outflow {
                continue;
            }
            let p = trace.nodes()[b].point;
            if planar {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt(to_f64(p.x)),
                    fmt(to_f64(p.y)),
                    fmt(to_f64(th.x)),
                    fmt(to_f64(th.y)),
                    fmt(to_f64(trace.xi_weight(b, j))),
                    fmt(to_f64(trace.value(b, j)))
                );
            } else {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    fmt(to_f64(p.x)),
                    fmt(to_f64(p.y)),
                    fmt(to_f64(p.z)),
                    fmt(to_f64(th.x)),
                    fmt(to_f64(th.y)),
                    fmt(to_f64(th.z)),
                    fmt(to_f64(trace.xi_weight(b, j))),
                    fmt(to_f64(trace.value(b, j)))
                );
            }
        }
    }
    out
}

/// Collimated ray profile rows `s,value`.
pub fn ray_profile_csv<T: Real>(profile: &crate::transport::RayProfile<T>) -> String {
    let mut out = String::from("s,value\n");
    for (s, v) in profile.s.iter().zip(&profile.v) {
        let _ = writeln!(out, "{},{}", fmt(to_f64(*s)), fmt(to_f64(*v)));
    }
    out
}

/// Atomic write: the content lands under `path` only as a complete file.
pub fn write_atomic(path: &Path, content: &str) -> crate::error::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = dir.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".into());
    tmp.push(format!(".{name}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
