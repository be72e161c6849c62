//! Legacy ASCII VTK structured grids.

use std::fmt::Write as _;

use stocp::{Error, Result};

/// Point samples on a logically rectangular `ni x nj x nk` grid, `i`
/// fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredGrid {
    pub dims: [usize; 3],
    pub points: Vec<[f64; 3]>,
    pub scalars: Vec<(String, Vec<f64>)>,
}

impl StructuredGrid {
    pub fn new(dims: [usize; 3], points: Vec<[f64; 3]>) -> Result<Self> {
        if dims.iter().product::<usize>() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid {:?} needs {} points, got {}",
                dims,
                dims.iter().product::<usize>(),
                points.len()
            )));
        }
        Ok(Self {
            dims,
            points,
            scalars: Vec::new(),
        })
    }

    pub fn add_scalar(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.points.len() {
            return Err(Error::DimensionMismatch(format!(
                "field '{name}' has {} values for {} points",
                values.len(),
                self.points.len()
            )));
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::Config(format!("invalid field name '{name}'")));
        }
        self.scalars.push((name.into(), values));
        Ok(())
    }

    pub fn to_legacy_ascii(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# vtk DataFile Version 3.0");
        let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
        let _ = writeln!(s, "ASCII");
        let _ = writeln!(s, "DATASET STRUCTURED_GRID");
        let _ = writeln!(s, "DIMENSIONS {} {} {}", self.dims[0], self.dims[1], self.dims[2]);
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]);
        }
        if !self.scalars.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", self.points.len());
            for (name, vals) in &self.scalars {
                let _ = writeln!(s, "SCALARS {name} double 1");
                let _ = writeln!(s, "LOOKUP_TABLE default");
                for v in vals {
                    let _ = writeln!(s, "{v:.12e}");
                }
            }
        }
        s
    }

    pub fn write(&self, path: &std::path::Path, title: &str) -> Result<()> {
        std::fs::write(path, self.to_legacy_ascii(title))?;
        Ok(())
    }
}
