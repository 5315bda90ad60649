//! Discrete function spaces on screen meshes.
//!
//! `P0Jump` puts one piecewise-constant dof on every element and
//! approximates the jump-density space of order -1/2. `P1ZeroTrace` puts
//! one continuous piecewise-linear dof on every vertex strictly interior to
//! its panel; vertices on panel boundaries (including isolated touch points
//! between panels) carry no dof, so every basis function vanishes on the
//! screen boundary as the order +1/2 trial space requires.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::PanelSet;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    P0Jump,
    P1ZeroTrace,
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::P0Jump => "P0_Jump",
            SpaceKind::P1ZeroTrace => "P1_ZeroTrace",
        }
    }
}

/// A discrete space bound to its mesh.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    pub kind: SpaceKind,
    pub mesh: Mesh,
    /// P1 only: dof index per mesh vertex.
    vertex_dof: Vec<Option<usize>>,
    /// P1 only: mesh vertex per dof.
    dof_vertex: Vec<usize>,
    n_dofs: usize,
}

/// Build the discrete space of the requested kind on `mesh`; the screen is
/// consulted only for its openness semantics (both kinds exclude panel
/// boundary vertices, which is what zero trace means on these unions).
pub fn build_space(mesh: Mesh, kind: SpaceKind, _screen: &PanelSet) -> Result<FunctionSpace> {
    FunctionSpace::new(mesh, kind)
}

impl FunctionSpace {
    pub fn new(mesh: Mesh, kind: SpaceKind) -> Result<Self> {
        match kind {
            SpaceKind::P0Jump => {
                let n = mesh.n_elements();
                if n == 0 {
                    return Err(Error::EmptySpace("mesh has no elements".into()));
                }
                Ok(FunctionSpace {
                    kind,
                    mesh,
                    vertex_dof: Vec::new(),
                    dof_vertex: Vec::new(),
                    n_dofs: n,
                })
            }
            SpaceKind::P1ZeroTrace => {
                let mut vertex_dof = vec![None; mesh.n_vertices()];
                let mut dof_vertex = Vec::new();
                for v in 0..mesh.n_vertices() {
                    if !mesh.vertex_on_panel_boundary[v] {
                        vertex_dof[v] = Some(dof_vertex.len());
                        dof_vertex.push(v);
                    }
                }
                if dof_vertex.is_empty() {
                    return Err(Error::EmptySpace(
                        "P1_ZeroTrace has no interior vertices; raise refine".into(),
                    ));
                }
                let n = dof_vertex.len();
                Ok(FunctionSpace {
                    kind,
                    mesh,
                    vertex_dof,
                    dof_vertex,
                    n_dofs: n,
                })
            }
        }
    }

    pub fn dof_count(&self) -> usize {
        self.n_dofs
    }

    pub fn dof_of_vertex(&self, v: usize) -> Option<usize> {
        match self.kind {
            SpaceKind::P0Jump => None,
            SpaceKind::P1ZeroTrace => self.vertex_dof[v],
        }
    }

    pub fn vertex_of_dof(&self, d: usize) -> usize {
        self.dof_vertex[d]
    }

    /// Local (vertex slot, global dof) pairs of an element.
    pub fn element_dofs(&self, e: usize) -> Vec<(usize, usize)> {
        match self.kind {
            SpaceKind::P0Jump => vec![(0, e)],
            SpaceKind::P1ZeroTrace => {
                let t = self.mesh.triangles[e];
                (0..3)
                    .filter_map(|i| self.vertex_dof[t[i]].map(|d| (i, d)))
                    .collect()
            }
        }
    }

    /// Constant gradients of the three barycentric hats on element `e`.
    pub fn hat_gradients(&self, e: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.mesh.triangle_coords(e);
        let two_a = 2.0 * self.mesh.element_area(e);
        [
            [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a],
            [(c[1] - a[1]) / two_a, (a[0] - c[0]) / two_a],
            [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a],
        ]
    }

    /// Evaluate the discrete function with coefficient vector `coeff` at a
    /// point (zero outside the mesh).
    pub fn evaluate(&self, coeff: &[Complex64], p: [f64; 2]) -> Complex64 {
        let Some(e) = self.mesh.locate_containing_element(p) else {
            return Complex64::new(0.0, 0.0);
        };
        match self.kind {
            SpaceKind::P0Jump => coeff[e],
            SpaceKind::P1ZeroTrace => {
                let t = self.mesh.triangles[e];
                let tri = crate::quadrature::Tri::new(self.mesh.triangle_coords(e));
                let lam = tri.barycentric(p);
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    if let Some(d) = self.vertex_dof[t[i]] {
                        s += coeff[d] * lam[i];
                    }
                }
                s
            }
        }
    }

    /// `<1, .>` weights: element areas for P0, hat integrals (area/3 summed
    /// over the support) for P1.
    pub fn dof_integrals(&self) -> Vec<f64> {
        match self.kind {
            SpaceKind::P0Jump => (0..self.mesh.n_elements())
                .map(|e| self.mesh.element_area(e))
                .collect(),
            SpaceKind::P1ZeroTrace => {
                let mut w = vec![0.0; self.n_dofs];
                for e in 0..self.mesh.n_elements() {
                    let third = self.mesh.element_area(e) / 3.0;
                    for (_, d) in self.element_dofs(e) {
                        w[d] += third;
                    }
                }
                w
            }
        }
    }
}

/// A sparse coarse-to-fine prolongation: `fine = P * coarse` exactly when
/// the fine mesh refines the coarse one on the coarse support.
#[derive(Debug, Clone)]
pub struct Prolongation {
    /// Per fine dof: (coarse dof, weight) entries.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub n_coarse: usize,
}

impl Prolongation {
    pub fn apply(&self, coarse: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&(c, w)| coarse[c] * w)
                    .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            })
            .collect()
    }

    /// `P^T r` (real matrix, complex vectors).
    pub fn apply_transpose(&self, fine: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_coarse];
        for (f, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                out[c] += fine[f] * w;
            }
        }
        out
    }

    /// Column `c` as a dense fine-coefficient vector (the prolonged coarse
    /// basis function).
    pub fn column(&self, c: usize, n_fine: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n_fine];
        for (f, row) in self.rows.iter().enumerate() {
            for &(cc, w) in row {
                if cc == c {
                    out[f] += Complex64::new(w, 0.0);
                }
            }
        }
        let _ = n_fine;
        out
    }
}

/// P0 prolongation by containment: each fine element inherits the value of
/// the coarse element containing its centroid (zero if uncovered, which is
/// how a sub-screen space embeds into a host screen space).
pub fn p0_prolongation(coarse: &FunctionSpace, fine: &FunctionSpace) -> Result<Prolongation> {
    if coarse.kind != SpaceKind::P0Jump || fine.kind != SpaceKind::P0Jump {
        return Err(Error::SpaceKind {
            expected: "P0_Jump",
            got: "mixed",
        });
    }
    let rows = (0..fine.mesh.n_elements())
        .map(|e| {
            let c = coarse
                .mesh
                .locate_containing_element(fine.mesh.element_centroid(e));
            c.map(|ce| vec![(ce, 1.0)]).unwrap_or_default()
        })
        .collect();
    Ok(Prolongation {
        rows,
        n_coarse: coarse.dof_count(),
    })
}

/// P1 prolongation by nodal interpolation: exact when the fine mesh refines
/// the coarse mesh, since coarse hats are then piecewise linear on fine
/// elements. Fine dofs outside the coarse screen get zero rows.
pub fn p1_prolongation(coarse: &FunctionSpace, fine: &FunctionSpace) -> Result<Prolongation> {
    if coarse.kind != SpaceKind::P1ZeroTrace || fine.kind != SpaceKind::P1ZeroTrace {
        return Err(Error::SpaceKind {
            expected: "P1_ZeroTrace",
            got: "mixed",
        });
    }
    let mut rows = Vec::with_capacity(fine.dof_count());
    for d in 0..fine.dof_count() {
        let p = fine.mesh.vertices[fine.vertex_of_dof(d)];
        let mut row = Vec::new();
        if let Some(ce) = coarse.mesh.locate_containing_element(p) {
            let tri = crate::quadrature::Tri::new(coarse.mesh.triangle_coords(ce));
            let lam = tri.barycentric(p);
            let t = coarse.mesh.triangles[ce];
            for i in 0..3 {
                if lam[i].abs() > 1e-13 {
                    if let Some(cd) = coarse.vertex_dof[t[i]] {
                        row.push((cd, lam[i]));
                    }
                }
            }
        }
        rows.push(row);
    }
    Ok(Prolongation {
        rows,
        n_coarse: coarse.dof_count(),
    })
}
