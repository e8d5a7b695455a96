//! Mesh files: `{"vertices": [[x, y], ...], "cells": [[v0, v1, ...], ...]}`.
//!
//! Cells are 0-based counter-clockwise vertex loops; edges are rebuilt on
//! read. Coordinates are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolygonMesh;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDocument {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
}

impl MeshDocument {
    pub fn from_mesh(mesh: &PolygonMesh) -> Self {
        MeshDocument {
            vertices: mesh.vertices().iter().map(|p| [p.x, p.y]).collect(),
            cells: mesh.cells().iter().map(|c| c.vertices.clone()).collect(),
        }
    }

    pub fn into_mesh(self) -> Result<PolygonMesh> {
        if self.vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::MeshFile("non-finite coordinate".into()));
        }
        let vertices = self.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
        PolygonMesh::from_cells(vertices, self.cells)
    }

    pub fn parse(text: &str) -> Result<PolygonMesh> {
        let doc: MeshDocument =
            serde_json::from_str(text).map_err(|e| Error::MeshFile(format!("malformed document: {e}")))?;
        doc.into_mesh()
    }

    /// JSON text with every coordinate in `{:.16e}` form.
    pub fn to_text(&self) -> String {
        let mut s = String::from("{\n  \"vertices\": [\n");
        for (i, [x, y]) in self.vertices.iter().enumerate() {
            let sep = if i + 1 == self.vertices.len() { "" } else { "," };
            let _ = writeln!(s, "    [{x:.16e}, {y:.16e}]{sep}");
        }
        s.push_str("  ],\n  \"cells\": [\n");
        for (i, c) in self.cells.iter().enumerate() {
            let ids: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let sep = if i + 1 == self.cells.len() { "" } else { "," };
            let _ = writeln!(s, "    [{}]{sep}", ids.join(", "));
        }
        s.push_str("  ]\n}\n");
        s
    }
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolygonMesh> {
    let text = std::fs::read_to_string(path)?;
    MeshDocument::parse(&text)
}

pub fn write_mesh(mesh: &PolygonMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, MeshDocument::from_mesh(mesh).to_text())?;
    Ok(())
}
