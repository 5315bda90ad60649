//! Panel subdivision into conforming triangle meshes.
//!
//! Squares are meshed as a uniform `k x k` cell grid with every cell split
//! along the same diagonal direction; for `k = 2^refine` this reproduces the
//! diagonal-split-then-quadrisect construction, and successive refinements
//! nest. Triangles are meshed by uniform barycentric subdivision into `k^2`
//! self-similar cells. The optional `grid` factor subdivides each panel
//! `grid`-fold first, which aligns a level-`j` Cantor mesh with the panels
//! of level `j+1` when `alpha = p/q` and `grid = q`.
//!
//! Vertices are produced as single exact integer divisions on the panel
//! lattice, so coincident points across meshes (nested levels, host meshes)
//! compare bitwise equal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ExactPanel, PanelSet};

/// Meshing controls. `refine` is the per-panel dyadic refinement depth,
/// `grid` an extra uniform subdivision of each panel, `element_cap` the hard
/// cap on the projected element count.
#[derive(Debug, Clone, Copy)]
pub struct MeshOptions {
    pub refine: u32,
    pub grid: u32,
    pub element_cap: usize,
}

pub const DEFAULT_ELEMENT_CAP: usize = 20_000;

impl MeshOptions {
    pub fn refine(refine: u32) -> Self {
        MeshOptions {
            refine,
            grid: 1,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn with_grid(mut self, grid: u32) -> Self {
        self.grid = grid.max(1);
        self
    }
}

/// A conforming triangle mesh of a panel set. Panels do not share vertices;
/// coincident lattice points of touching panels are distinct entries with
/// bitwise-equal coordinates.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Element -> panel index in the generating screen.
    pub elem_panel: Vec<usize>,
    /// Vertex -> panel index.
    pub vertex_panel: Vec<usize>,
    /// Whether a vertex lies on the boundary of its own panel.
    pub vertex_on_panel_boundary: Vec<bool>,
    /// Per-panel half-open element index ranges.
    pub panel_elems: Vec<(usize, usize)>,
    /// Max element diameter.
    pub h: f64,
    pub(crate) panel_bbox: Vec<[f64; 4]>,
}

impl Mesh {
    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(e);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let [a, b, c] = self.triangle_coords(e);
        [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
        ]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_area(e)).sum()
    }

    /// Element containing `p`, or `None`. Points on shared edges resolve to
    /// the first matching element in panel order.
    pub fn locate_containing_element(&self, p: [f64; 2]) -> Option<usize> {
        let tol = 1e-12 * (1.0 + self.h);
        for (pi, &(lo, hi)) in self.panel_elems.iter().enumerate() {
            let bb = self.panel_bbox[pi];
            if p[0] < bb[0] - tol || p[0] > bb[2] + tol || p[1] < bb[1] - tol || p[1] > bb[3] + tol
            {
                continue;
            }
            for e in lo..hi {
                if self.element_contains(e, p, tol) {
                    return Some(e);
                }
            }
        }
        None
    }

    fn element_contains(&self, e: usize, p: [f64; 2], tol: f64) -> bool {
        let [a, b, c] = self.triangle_coords(e);
        let cross = |u: [f64; 2], v: [f64; 2], w: [f64; 2]| {
            (v[0] - u[0]) * (w[1] - u[1]) - (w[0] - u[0]) * (v[1] - u[1])
        };
        cross(a, b, p) >= -tol && cross(b, c, p) >= -tol && cross(c, a, p) >= -tol
    }

    /// Mesh export as `{"vertices": [[x, y], ...], "triangles": [[i, j, k], ...]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            vertices: &'a [[f64; 2]],
            triangles: &'a [[usize; 3]],
        }
        serde_json::to_string_pretty(&View {
            vertices: &self.vertices,
            triangles: &self.triangles,
        })
        .expect("mesh serializes")
    }
}

/// Mesh every panel of `screen` with `2 g^2 4^refine` triangles per square
/// and `g^2 4^refine` per triangle panel.
pub fn mesh_panels(screen: &PanelSet, refine: u32) -> Result<Mesh> {
    mesh_panels_with(screen, &MeshOptions::refine(refine))
}

pub fn mesh_panels_with(screen: &PanelSet, opts: &MeshOptions) -> Result<Mesh> {
    if screen.is_empty() {
        return Err(Error::domain("cannot mesh an empty screen"));
    }
    let k = (opts.grid.max(1) as usize) << opts.refine;
    let projected: usize = screen
        .exact
        .iter()
        .map(|p| match p {
            ExactPanel::Square { .. } | ExactPanel::SquareF { .. } => 2 * k * k,
            ExactPanel::Triangle { .. } => k * k,
        })
        .sum();
    if projected > opts.element_cap {
        return Err(Error::Capacity {
            required: projected,
            cap: opts.element_cap,
        });
    }

    let mut mesh = Mesh {
        vertices: Vec::new(),
        triangles: Vec::new(),
        elem_panel: Vec::new(),
        vertex_panel: Vec::new(),
        vertex_on_panel_boundary: Vec::new(),
        panel_elems: Vec::with_capacity(screen.exact.len()),
        h: 0.0,
        panel_bbox: Vec::with_capacity(screen.exact.len()),
    };

    for (pi, panel) in screen.exact.iter().enumerate() {
        let elem_lo = mesh.triangles.len();
        match panel {
            ExactPanel::Square { xn, yn, sn, den } => {
                let coord = |steps: i64, i: usize| -> f64 {
                    ((steps * k as i64 + sn * i as i64) as f64) / ((den * k as i64) as f64)
                };
                square_grid(&mut mesh, pi, k, |i, j| [coord(*xn, i), coord(*yn, j)]);
            }
            ExactPanel::SquareF { x, y, side } => {
                square_grid(&mut mesh, pi, k, |i, j| {
                    [
                        x + side * (i as f64 / k as f64),
                        y + side * (j as f64 / k as f64),
                    ]
                });
            }
            ExactPanel::Triangle { v, den } => {
                let s3 = 0.75_f64.sqrt();
                let [a, b, c] = *v;
                let denk = (den * k as i64) as f64;
                triangle_grid(&mut mesh, pi, k, |i, j| {
                    let i = i as i64;
                    let j = j as i64;
                    let xn = a.0 * k as i64 + i * (b.0 - a.0) + j * (c.0 - a.0);
                    let yn = a.1 * k as i64 + i * (b.1 - a.1) + j * (c.1 - a.1);
                    [xn as f64 / denk, yn as f64 / denk * s3]
                });
            }
        }
        mesh.panel_elems.push((elem_lo, mesh.triangles.len()));
        let verts_of_panel = mesh
            .vertex_panel
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == pi)
            .map(|(v, _)| mesh.vertices[v]);
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for v in verts_of_panel {
            bb[0] = bb[0].min(v[0]);
            bb[1] = bb[1].min(v[1]);
            bb[2] = bb[2].max(v[0]);
            bb[3] = bb[3].max(v[1]);
        }
        mesh.panel_bbox.push(bb);
    }

    mesh.h = (0..mesh.n_elements())
        .map(|e| {
            let [a, b, c] = mesh.triangle_coords(e);
            let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            d(a, b).max(d(b, c)).max(d(c, a))
        })
        .fold(0.0, f64::max);
    Ok(mesh)
}

fn square_grid(mesh: &mut Mesh, panel: usize, k: usize, coord: impl Fn(usize, usize) -> [f64; 2]) {
    let base = mesh.vertices.len();
    for j in 0..=k {
        for i in 0..=k {
            mesh.vertices.push(coord(i, j));
            mesh.vertex_panel.push(panel);
            mesh.vertex_on_panel_boundary
                .push(i == 0 || i == k || j == 0 || j == k);
        }
    }
    let idx = |i: usize, j: usize| base + j * (k + 1) + i;
    for j in 0..k {
        for i in 0..k {
            // Both cells split along the lower-left to upper-right diagonal.
            mesh.triangles
                .push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            mesh.triangles
                .push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            mesh.elem_panel.push(panel);
            mesh.elem_panel.push(panel);
        }
    }
}

fn triangle_grid(mesh: &mut Mesh, panel: usize, k: usize, coord: impl Fn(usize, usize) -> [f64; 2]) {
    let base = mesh.vertices.len();
    let mut row_start = vec![0usize; k + 2];
    let mut count = 0usize;
    for j in 0..=k {
        row_start[j] = count;
        for i in 0..=(k - j) {
            mesh.vertices.push(coord(i, j));
            mesh.vertex_panel.push(panel);
            mesh.vertex_on_panel_boundary
                .push(i == 0 || j == 0 || i + j == k);
            count += 1;
        }
    }
    row_start[k + 1] = count;
    let idx = |i: usize, j: usize| base + row_start[j] + i;
    for j in 0..k {
        for i in 0..(k - j) {
            mesh.triangles
                .push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
            mesh.elem_panel.push(panel);
            if i + j < k - 1 {
                mesh.triangles
                    .push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                mesh.elem_panel.push(panel);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cantor_dust_prefractal, sierpinski_complement_screen};

    fn unit_square() -> PanelSet {
        cantor_dust_prefractal(1.0 / 3.0, 0).unwrap()
    }

    #[test]
    fn unit_square_refine0() {
        let m = mesh_panels(&unit_square(), 0).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert!((m.h - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_square_refine2() {
        let m = mesh_panels(&unit_square(), 2).unwrap();
        assert_eq!(m.n_elements(), 32);
        assert_eq!(m.n_vertices(), 25);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_meshes_by_panel() {
        let s = sierpinski_complement_screen(2).unwrap();
        let m = mesh_panels(&s, 1).unwrap();
        assert_eq!(m.n_elements(), 16); // 4 panels x 4 triangles
        assert!((m.total_area() - s.total_area()).abs() < 1e-13);
    }

    #[test]
    fn orientation_ccw_everywhere() {
        let s = sierpinski_complement_screen(3).unwrap();
        let m = mesh_panels(&s, 2).unwrap();
        for e in 0..m.n_elements() {
            assert!(m.element_area(e) > 0.0);
        }
        let m = mesh_panels(&cantor_dust_prefractal(0.3, 2).unwrap(), 1).unwrap();
        for e in 0..m.n_elements() {
            assert!(m.element_area(e) > 0.0);
        }
    }

    #[test]
    fn area_conservation() {
        for &(alpha, j, r) in &[(1.0 / 3.0, 2u32, 1u32), (0.2, 1, 2), (0.41, 2, 0)] {
            let s = cantor_dust_prefractal(alpha, j as i64).unwrap();
            let m = mesh_panels(&s, r).unwrap();
            assert!(
                (m.total_area() - s.total_area()).abs() < 1e-12,
                "alpha={alpha} j={j} r={r}"
            );
        }
    }

    #[test]
    fn element_cap_enforced() {
        let s = cantor_dust_prefractal(1.0 / 3.0, 4).unwrap();
        let err = mesh_panels_with(
            &s,
            &MeshOptions {
                refine: 3,
                grid: 1,
                element_cap: 20_000,
            },
        );
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn grid_subdivision_counts_and_alignment() {
        // Level-1 mesh on the q-grid contains the level-2 panels as unions
        // of whole elements: every level-2 panel corner is a lattice point.
        let s1 = cantor_dust_prefractal(1.0 / 3.0, 1).unwrap();
        let m = mesh_panels_with(&s1, &MeshOptions::refine(0).with_grid(3)).unwrap();
        assert_eq!(m.n_elements(), 4 * 9 * 2);
        let s2 = cantor_dust_prefractal(1.0 / 3.0, 2).unwrap();
        let m2 = mesh_panels(&s2, 0).unwrap();
        for v in &m2.vertices {
            assert!(
                m.vertices.iter().any(|w| w == v),
                "level-2 vertex {v:?} missing from level-1 grid mesh"
            );
        }
    }

    #[test]
    fn nested_refinement_vertices() {
        let s = cantor_dust_prefractal(1.0 / 3.0, 1).unwrap();
        let coarse = mesh_panels(&s, 1).unwrap();
        let fine = mesh_panels(&s, 2).unwrap();
        for v in &coarse.vertices {
            assert!(fine.vertices.iter().any(|w| w == v));
        }
    }

    #[test]
    fn locate_finds_centroids() {
        let s = sierpinski_complement_screen(2).unwrap();
        let m = mesh_panels(&s, 1).unwrap();
        for e in 0..m.n_elements() {
            assert_eq!(m.locate_containing_element(m.element_centroid(e)), Some(e));
        }
        assert_eq!(m.locate_containing_element([10.0, 10.0]), None);
    }

    #[test]
    fn json_export_shape() {
        let m = mesh_panels(&unit_square(), 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
        assert_eq!(v["triangles"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn empty_screen_rejected() {
        let s = PanelSet {
            family: crate::geometry::Family::SierpinskiGasket,
            level: 0,
            panels: vec![],
            open: false,
            exact: vec![],
        };
        assert!(mesh_panels(&s, 0).is_err());
    }
}
