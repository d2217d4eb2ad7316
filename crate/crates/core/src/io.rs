//! CSV and JSON artifacts. Floats are written with 17 significant digits and JSON
//! object keys are sorted, so identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::diagnostics::{KappaStudy, RefineStudy, StudyTable};
use crate::error::{Error, Result};
use crate::geometry::{PhysicalParams, Profile};
use crate::mesh::LayeredMesh;
use crate::solver::Solution;

pub const FIELD_HEADER: [&str; 6] = ["x", "z", "layer", "chi", "h", "psi"];
pub const PROFILE_HEADER: [&str; 2] = ["x", "u"];
pub const MESH_HEADER: [&str; 7] = ["i", "j", "x", "z", "tag", "layer", "active"];
pub const STUDY_HEADER: [&str; 10] = [
    "n",
    "perturbation",
    "e_h1",
    "energy",
    "energy_gap",
    "trace_gap_p2",
    "trace_gap_p4",
    "interface_gap_p2",
    "interface_gap_p4",
    "base_energy",
];

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records().map(|rec| rec.map_err(|e| csv_err(path, e))).collect()
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("{}: record {line}: `{s}` is not a number", path.display())))
}

/// One row of a field file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub z: f64,
    pub layer: String,
    pub chi: f64,
    pub h: f64,
    pub psi: f64,
}

pub fn field_rows(solution: &Solution) -> Vec<FieldRow> {
    let mesh = &solution.mesh;
    (0..mesh.node_count())
        .map(|n| {
            let (x, z) = mesh.coords(n);
            FieldRow {
                x,
                z,
                layer: mesh.node_layer(n).as_str().to_string(),
                chi: solution.chi.values[n],
                h: solution.h.values[n],
                psi: solution.psi.values[n],
            }
        })
        .collect()
}

pub fn write_field_rows(path: &Path, rows: &[FieldRow]) -> Result<()> {
    write_rows(
        path,
        &FIELD_HEADER,
        rows.iter().map(|r| vec![fmt_f64(r.x), fmt_f64(r.z), r.layer.clone(), fmt_f64(r.chi), fmt_f64(r.h), fmt_f64(r.psi)]),
    )
}

/// Writes `x,z,layer,chi,h,psi` for every node in index order.
pub fn write_field_csv(path: &Path, solution: &Solution) -> Result<()> {
    write_field_rows(path, &field_rows(solution))
}

pub fn read_field_csv(path: &Path) -> Result<Vec<FieldRow>> {
    read_rows(path, &FIELD_HEADER)?
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            if rec.len() != 6 {
                return Err(Error::Parse(format!("{}: record {} has {} fields", path.display(), k + 1, rec.len())));
            }
            Ok(FieldRow {
                x: parse_f64(path, k + 1, &rec[0])?,
                z: parse_f64(path, k + 1, &rec[1])?,
                layer: rec[2].to_string(),
                chi: parse_f64(path, k + 1, &rec[3])?,
                h: parse_f64(path, k + 1, &rec[4])?,
                psi: parse_f64(path, k + 1, &rec[5])?,
            })
        })
        .collect()
}

pub fn write_profile_csv(path: &Path, profile: &Profile) -> Result<()> {
    write_rows(path, &PROFILE_HEADER, profile.x().iter().zip(profile.u()).map(|(x, u)| vec![fmt_f64(*x), fmt_f64(*u)]))
}

/// Reads `x,u` rows; derivatives come from finite differences.
pub fn read_profile_csv(path: &Path, params: PhysicalParams) -> Result<Profile> {
    let rows = read_rows(path, &PROFILE_HEADER)?;
    let mut x = Vec::with_capacity(rows.len());
    let mut u = Vec::with_capacity(rows.len());
    for (k, rec) in rows.iter().enumerate() {
        if rec.len() != 2 {
            return Err(Error::Parse(format!("{}: record {} has {} fields", path.display(), k + 1, rec.len())));
        }
        x.push(parse_f64(path, k + 1, &rec[0])?);
        u.push(parse_f64(path, k + 1, &rec[1])?);
    }
    Profile::from_grid(params, x, u)
}

pub fn write_mesh_csv(path: &Path, mesh: &LayeredMesh) -> Result<()> {
    write_rows(
        path,
        &MESH_HEADER,
        (0..mesh.node_count()).map(|n| {
            let (i, j) = mesh.node_ij(n);
            let (x, z) = mesh.coords(n);
            vec![
                i.to_string(),
                j.to_string(),
                fmt_f64(x),
                fmt_f64(z),
                mesh.tag(n).as_str().to_string(),
                mesh.node_layer(n).as_str().to_string(),
                mesh.node_active(n).to_string(),
            ]
        }),
    )
}

/// Stability records sorted by `n`.
pub fn write_study_csv(path: &Path, table: &StudyTable) -> Result<()> {
    let mut records = table.records.clone();
    records.sort_by_key(|r| r.n);
    write_rows(
        path,
        &STUDY_HEADER,
        records.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.perturbation),
                fmt_f64(r.e_h1),
                fmt_f64(r.energy),
                fmt_f64(r.energy_gap),
                fmt_f64(r.trace_gap_p2),
                fmt_f64(r.trace_gap_p4),
                fmt_f64(r.interface_gap_p2),
                fmt_f64(r.interface_gap_p4),
                fmt_f64(table.base_energy),
            ]
        }),
    )
}

pub fn write_kappa_csv(path: &Path, study: &KappaStudy) -> Result<()> {
    let header = ["profile", "level", "lower", "lower_excluded_fraction", "lower_empty", "upper", "upper_excluded_fraction"];
    write_rows(
        path,
        &header,
        study.records.iter().map(|r| {
            vec![
                r.profile.clone(),
                r.level.to_string(),
                fmt_f64(r.lower.estimate),
                fmt_f64(r.lower.excluded_fraction),
                r.lower.empty.to_string(),
                fmt_f64(r.upper.estimate),
                fmt_f64(r.upper.excluded_fraction),
            ]
        }),
    )
}

pub fn write_refine_csv(path: &Path, study: &RefineStudy) -> Result<()> {
    let header = ["nx", "h", "l2_error", "linf_error", "energy", "flux_jump_l2", "identity_relative"];
    let mut records = study.records.clone();
    records.sort_by_key(|r| r.nx);
    write_rows(
        path,
        &header,
        records.iter().map(|r| {
            vec![
                r.nx.to_string(),
                fmt_f64(r.h),
                fmt_f64(r.l2_error),
                fmt_f64(r.linf_error),
                fmt_f64(r.energy),
                fmt_f64(r.flux_jump_l2),
                r.identity_relative.map(fmt_f64).unwrap_or_default(),
            ]
        }),
    )
}

/// Pretty JSON with 17-digit floats.
struct StableFormatter(PrettyFormatter<'static>);

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with sorted keys (via [`serde_json::Value`]) and 17-digit floats.
/// Non-finite floats become `null`.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, StableFormatter(PrettyFormatter::new()));
    tree.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    fs::write(path, to_stable_json(value)?).map_err(|e| Error::io(path, e))
}
