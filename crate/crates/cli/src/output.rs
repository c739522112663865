//! Result files: CSV tables with a schema and config header, JSON summaries
//! and legacy VTK fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use subdiff_core::mesh::Mesh;

use crate::error::CliError;

/// CSV table whose first lines are `# subdiff <schema> v1` and
/// `# config: <json>`.
pub struct Table {
    schema: String,
    config: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, config: &impl Serialize, header: &[&str]) -> Result<Self, CliError> {
        Ok(Self {
            schema: schema.to_string(),
            config: serde_json::to_string(config)?,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        })
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| io_at(path, e))?);
        writeln!(file, "# subdiff {} v1", self.schema)?;
        writeln!(file, "# config: {}", self.config)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip text for a float; `nan` for missing entries.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path).map_err(|e| io_at(path, e))?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with nodal scalars.
pub fn write_vtk(path: &Path, mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| io_at(path, e))?);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "subdiff cell fields")?;
    writeln!(f, "ASCII")?;
    writeln!(f, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(f, "POINTS {} double", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(f, "{} {} 0", p[0], p[1])?;
    }
    let nt = mesh.triangles.len();
    writeln!(f, "CELLS {} {}", nt, 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(f, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(f, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(f, "5")?;
    }
    writeln!(f, "CELL_DATA {nt}")?;
    writeln!(f, "SCALARS tag int 1")?;
    writeln!(f, "LOOKUP_TABLE default")?;
    for t in &mesh.triangle_tags {
        writeln!(f, "{t}")?;
    }
    if !fields.is_empty() {
        writeln!(f, "POINT_DATA {}", mesh.nodes.len())?;
        for (name, values) in fields {
            if values.len() != mesh.nodes.len() {
                return Err(CliError::Io(format!("field {name} has {} values", values.len())));
            }
            writeln!(f, "SCALARS {name} double 1")?;
            writeln!(f, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(f, "{v}")?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

fn io_at(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use subdiff_core::mesh::structured_rectangle;

    #[test]
    fn table_starts_with_schema_and_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new("demo", &serde_json::json!({"tau": 0.5}), &["a", "b"]).unwrap();
        t.push(vec![num(1.5), num(f64::NAN)]);
        t.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# subdiff demo v1");
        assert_eq!(lines[1], r#"# config: {"tau":0.5}"#);
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1.5e0,nan");
    }

    #[test]
    fn vtk_lists_points_cells_and_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vtk");
        let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2);
        let phi = vec![0.0; mesh.nodes.len()];
        write_vtk(&path, &mesh, &[("phi", &phi)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(&format!("POINTS {} double", mesh.nodes.len())));
        assert!(text.contains(&format!("CELLS {} {}", mesh.triangles.len(), 4 * mesh.triangles.len())));
        assert!(text.contains("SCALARS phi double 1"));
        assert!(write_vtk(&path, &mesh, &[("bad", &[1.0])]).is_err());
    }
}
