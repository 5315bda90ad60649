//! Galerkin assembly of the single-layer form on `P0Jump` and the
//! hypersingular form on `P1ZeroTrace`.
//!
//! The hypersingular operator is only ever discretized in its
//! integration-by-parts form, valid on a flat screen for densities that
//! vanish on the screen boundary:
//! `A[p][q] = \int\int Phi(x,y) [ grad p_q(y) . grad p_p(x)
//!                               - k^2 p_q(y) p_p(x) ] ds ds`,
//! so only weakly singular integrals arise and the single-layer quadrature
//! is reused. On the imaginary wavenumber axis both forms are real
//! symmetric positive definite.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[cfg(not(target_arch = "wasm32"))]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Wavenumber;
use crate::linalg;
use crate::quadrature::{
    classify_from_shared, detect_point_touch, separated_moments, singular_moments, triangle_rule,
    ElemRule, PairClass, PairMoments, QuadratureOptions, Tri,
};
use crate::spaces::{FunctionSpace, SpaceKind};

/// Which screen problem a system discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Single-layer equation for the normal-derivative jump.
    DirichletJump,
    /// Hypersingular equation for the trace jump.
    NeumannJump,
}

/// Closed-form boundary data on the screen plane.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryData {
    Constant { re: f64, im: f64 },
    /// Trace of a plane wave `exp(i k d . x)` with `|d| <= 1`.
    PlaneWave { dir: [f64; 2] },
    /// `sum c x^px y^py`.
    Polynomial { terms: Vec<PolyTerm> },
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    pub px: u32,
    pub py: u32,
}

impl BoundaryData {
    pub fn constant(c: f64) -> Self {
        BoundaryData::Constant { re: c, im: 0.0 }
    }

    pub fn evaluate(&self, k: Wavenumber, p: [f64; 2]) -> Complex64 {
        match self {
            BoundaryData::Constant { re, im } => Complex64::new(*re, *im),
            BoundaryData::PlaneWave { dir } => {
                let t = dir[0] * p[0] + dir[1] * p[1];
                (Complex64::i() * k.value() * t).exp()
            }
            BoundaryData::Polynomial { terms } => terms
                .iter()
                .map(|t| Complex64::new(t.coeff * p[0].powi(t.px as i32) * p[1].powi(t.py as i32), 0.0))
                .sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BoundaryData::PlaneWave { dir } = self {
            let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
            if n > 1.0 + 1e-12 {
                return Err(Error::domain(format!(
                    "plane-wave direction must have |d| <= 1, got |d| = {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundaryData::Constant { re, im } => *re == 0.0 && *im == 0.0,
            BoundaryData::PlaneWave { .. } => false,
            BoundaryData::Polynomial { terms } => terms.iter().all(|t| t.coeff == 0.0),
        }
    }
}

/// Continuity/coercivity estimates of an assembled matrix: the largest
/// singular value and the smallest eigenvalue (in magnitude) of the
/// Hermitian part. Reported, never asserted against continuum constants.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Diagnostics {
    pub continuity_est: f64,
    pub coercivity_est: f64,
}

pub fn matrix_diagnostics(a: &DMatrix<Complex64>) -> Diagnostics {
    Diagnostics {
        continuity_est: linalg::sigma_max(a),
        coercivity_est: linalg::hermitian_part_lambda_min(a),
    }
}

/// Assembled Galerkin matrix, load vector and space.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub space: FunctionSpace,
    pub k: Wavenumber,
    pub problem: ProblemKind,
    pub diagnostics: Option<Diagnostics>,
}

impl GalerkinSystem {
    /// Assemble matrix and right-hand side for a screen problem. Dirichlet
    /// uses the single-layer form on P0, Neumann the hypersingular form on
    /// P1; the Neumann load carries the minus sign of its weak form.
    pub fn build(
        space: FunctionSpace,
        k: Wavenumber,
        problem: ProblemKind,
        data: &BoundaryData,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        data.validate()?;
        let matrix = match problem {
            ProblemKind::DirichletJump => assemble_single_layer(&space, k, opts)?,
            ProblemKind::NeumannJump => assemble_hypersingular(&space, k, opts)?,
        };
        let rhs = assemble_rhs(&space, data, k, problem, opts);
        Ok(GalerkinSystem {
            matrix,
            rhs,
            space,
            k,
            problem,
            diagnostics: None,
        })
    }

    pub fn with_diagnostics(mut self) -> Self {
        self.diagnostics = Some(matrix_diagnostics(&self.matrix));
        self
    }

    pub fn dof_count(&self) -> usize {
        self.space.dof_count()
    }

    /// Binary matrix dump (header `SBEMMAT1`, u64 LE dimension, row-major
    /// interleaved re/im f64 LE) plus a JSON metadata sidecar at
    /// `<path>.json`.
    pub fn dump_matrix(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(b"SBEMMAT1")?;
        let n = self.matrix.nrows() as u64;
        f.write_all(&n.to_le_bytes())?;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let z = self.matrix[(i, j)];
                f.write_all(&z.re.to_le_bytes())?;
                f.write_all(&z.im.to_le_bytes())?;
            }
        }
        f.flush()?;
        let meta = serde_json::json!({
            "dimension": self.matrix.nrows(),
            "layout": "row-major complex f64 little-endian",
            "space": self.space.kind.name(),
            "problem": self.problem,
            "wavenumber": {"re": self.k.value().re, "im": self.k.value().im},
            "version": env!("CARGO_PKG_VERSION"),
        });
        let meta_path = path.with_extension(match path.extension() {
            Some(e) => format!("{}.json", e.to_string_lossy()),
            None => "json".to_string(),
        });
        std::fs::write(meta_path, serde_json::to_string_pretty(&meta).unwrap())?;
        Ok(())
    }
}

struct ElemData {
    tri: Tri,
    panel: usize,
    diam: f64,
    centroid: [f64; 2],
    radius: f64,
    far: ElemRule,
    near: ElemRule,
    #[allow(dead_code)]
    grads: [[f64; 2]; 3],
}

fn element_data(space: &FunctionSpace, opts: &QuadratureOptions) -> Vec<ElemData> {
    (0..space.mesh.n_elements())
        .map(|e| {
            let tri = Tri::new(space.mesh.triangle_coords(e));
            let centroid = tri.centroid();
            let radius = tri
                .v
                .iter()
                .map(|v| ((v[0] - centroid[0]).powi(2) + (v[1] - centroid[1]).powi(2)).sqrt())
                .fold(0.0, f64::max);
            ElemData {
                tri,
                panel: space.mesh.elem_panel[e],
                diam: tri.diameter(),
                centroid,
                radius,
                far: triangle_rule(&tri, opts.far_order),
                near: triangle_rule(&tri, opts.near_order),
                grads: space.hat_gradients(e),
            }
        })
        .collect()
}

fn shared_vertices(space: &FunctionSpace, ed: &[ElemData], e: usize, f: usize) -> Vec<(usize, usize)> {
    let te = space.mesh.triangles[e];
    let tf = space.mesh.triangles[f];
    let mut shared = Vec::new();
    if ed[e].panel == ed[f].panel {
        for (i, &vi) in te.iter().enumerate() {
            for (j, &vj) in tf.iter().enumerate() {
                if vi == vj {
                    shared.push((i, j));
                }
            }
        }
    } else {
        // Cross-panel contacts: lattice generation makes coincident points
        // bitwise equal.
        for i in 0..3 {
            for j in 0..3 {
                if ed[e].tri.v[i] == ed[f].tri.v[j] {
                    shared.push((i, j));
                }
            }
        }
    }
    shared
}

fn pair_class(space: &FunctionSpace, ed: &[ElemData], e: usize, f: usize) -> PairClass {
    if e == f {
        return PairClass::Coincident;
    }
    let shared = shared_vertices(space, ed, e, f);
    if !shared.is_empty() {
        return classify_from_shared(&shared);
    }
    let scale = ed[e].diam.max(ed[f].diam);
    let gap_lb = {
        let dc = ((ed[e].centroid[0] - ed[f].centroid[0]).powi(2)
            + (ed[e].centroid[1] - ed[f].centroid[1]).powi(2))
        .sqrt();
        dc - ed[e].radius - ed[f].radius
    };
    if gap_lb > 1e-9 * scale {
        return PairClass::Separated;
    }
    detect_point_touch(&ed[e].tri, &ed[f].tri, 1e-12 * (1.0 + scale))
}

fn moments_for_pair(
    ed: &[ElemData],
    e: usize,
    f: usize,
    class: &PairClass,
    k: Wavenumber,
    opts: &QuadratureOptions,
    want_hats: bool,
) -> Result<PairMoments> {
    match class {
        PairClass::Separated => {
            let scale = ed[e].diam.max(ed[f].diam);
            let gap_lb = {
                let dc = ((ed[e].centroid[0] - ed[f].centroid[0]).powi(2)
                    + (ed[e].centroid[1] - ed[f].centroid[1]).powi(2))
                .sqrt();
                dc - ed[e].radius - ed[f].radius
            };
            let far = if gap_lb > opts.near_threshold * scale {
                true
            } else {
                crate::quadrature::triangle_distance(&ed[e].tri, &ed[f].tri)
                    > opts.near_threshold * scale
            };
            let m = if far {
                separated_moments(&ed[e].far, &ed[f].far, k, want_hats)
            } else {
                separated_moments(&ed[e].near, &ed[f].near, k, want_hats)
            };
            Ok(m)
        }
        other => singular_moments(&ed[e].tri, &ed[f].tri, other, k, opts, want_hats),
    }
}

fn triangular_unrank(t: usize, n: usize) -> (usize, usize) {
    // Pair index within { (e, f) : e <= f < n }, ordered by e then f.
    let mut e = ((2.0 * n as f64 + 1.0
        - ((2.0 * n as f64 + 1.0).powi(2) - 8.0 * t as f64).sqrt())
        / 2.0)
        .floor() as usize;
    let row_start = |e: usize| e * n - e * (e + 1) / 2 + e;
    while e + 1 < n && row_start(e + 1) <= t {
        e += 1;
    }
    while row_start(e) > t {
        e -= 1;
    }
    (e, e + (t - row_start(e)))
}

fn assemble_pairs(
    space: &FunctionSpace,
    k: Wavenumber,
    opts: &QuadratureOptions,
    want_hats: bool,
    mut accumulate: impl FnMut(usize, usize, &PairMoments),
) -> Result<()> {
    let ed = element_data(space, opts);
    let n = space.mesh.n_elements();
    let total = n * (n + 1) / 2;
    const CHUNK: usize = 1 << 16;
    let mut start = 0usize;
    while start < total {
        let end = (start + CHUNK).min(total);
        let compute = |t: usize| -> Result<PairMoments> {
            let (e, f) = triangular_unrank(t, n);
            let class = pair_class(space, &ed, e, f);
            moments_for_pair(&ed, e, f, &class, k, opts, want_hats)
        };
        #[cfg(not(target_arch = "wasm32"))]
        let chunk: Result<Vec<PairMoments>> = (start..end).into_par_iter().map(compute).collect();
        #[cfg(target_arch = "wasm32")]
        let chunk: Result<Vec<PairMoments>> = (start..end).map(compute).collect();
        let chunk = chunk?;
        for (off, m) in chunk.iter().enumerate() {
            let (e, f) = triangular_unrank(start + off, n);
            accumulate(e, f, m);
        }
        start = end;
    }
    Ok(())
}

/// Single-layer Galerkin matrix on a `P0Jump` space:
/// `A[p][q] = \int_{T_p} \int_{T_q} Phi(x, y) ds(y) ds(x)`.
pub fn assemble_single_layer(
    space: &FunctionSpace,
    k: Wavenumber,
    opts: &QuadratureOptions,
) -> Result<DMatrix<Complex64>> {
    if space.kind != SpaceKind::P0Jump {
        return Err(Error::SpaceKind {
            expected: "P0_Jump",
            got: space.kind.name(),
        });
    }
    let n = space.dof_count();
    let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    assemble_pairs(space, k, opts, false, |e, f, m| {
        a[(e, f)] = m.s00;
        a[(f, e)] = m.s00;
    })?;
    Ok(a)
}

/// Hypersingular Galerkin matrix on a `P1ZeroTrace` space in
/// integration-by-parts form (see module docs).
pub fn assemble_hypersingular(
    space: &FunctionSpace,
    k: Wavenumber,
    opts: &QuadratureOptions,
) -> Result<DMatrix<Complex64>> {
    if space.kind != SpaceKind::P1ZeroTrace {
        return Err(Error::SpaceKind {
            expected: "P1_ZeroTrace",
            got: space.kind.name(),
        });
    }
    let n = space.dof_count();
    let k2 = k.value() * k.value();
    let elem_dofs: Vec<Vec<(usize, usize)>> = (0..space.mesh.n_elements())
        .map(|e| space.element_dofs(e))
        .collect();
    let grads: Vec<[[f64; 2]; 3]> = (0..space.mesh.n_elements())
        .map(|e| space.hat_gradients(e))
        .collect();
    let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    assemble_pairs(space, k, opts, true, |e, f, m| {
        for &(i, di) in &elem_dofs[e] {
            for &(j, dj) in &elem_dofs[f] {
                let gg = grads[e][i][0] * grads[f][j][0] + grads[e][i][1] * grads[f][j][1];
                let val = m.s00 * gg - k2 * m.s1[i][j];
                a[(di, dj)] += val;
                if e != f {
                    a[(dj, di)] += val;
                }
            }
        }
    })?;
    Ok(a)
}

/// Load vector `b[p] = s \int data . basis_p ds`, with `s = +1` for the
/// Dirichlet weak form and `s = -1` for the Neumann one.
pub fn assemble_rhs(
    space: &FunctionSpace,
    data: &BoundaryData,
    k: Wavenumber,
    problem: ProblemKind,
    opts: &QuadratureOptions,
) -> DVector<Complex64> {
    let sign = match problem {
        ProblemKind::DirichletJump => 1.0,
        ProblemKind::NeumannJump => -1.0,
    };
    let mut b = DVector::from_element(space.dof_count(), Complex64::new(0.0, 0.0));
    for e in 0..space.mesh.n_elements() {
        let tri = Tri::new(space.mesh.triangle_coords(e));
        let rule = triangle_rule(&tri, opts.near_order);
        match space.kind {
            SpaceKind::P0Jump => {
                let mut s = Complex64::new(0.0, 0.0);
                for (i, p) in rule.points.iter().enumerate() {
                    s += data.evaluate(k, *p) * rule.weights[i];
                }
                b[e] += s * sign;
            }
            SpaceKind::P1ZeroTrace => {
                for (loc, d) in space.element_dofs(e) {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (i, p) in rule.points.iter().enumerate() {
                        s += data.evaluate(k, *p) * (rule.weights[i] * rule.bary[i][loc]);
                    }
                    b[d] += s * sign;
                }
            }
        }
    }
    b
}

/// `<1, v>` functional of a coefficient vector: sum of coefficients times
/// basis integrals.
pub fn one_functional(space: &FunctionSpace, coeff: &DVector<Complex64>) -> Complex64 {
    let w = space.dof_integrals();
    let mut s = Complex64::new(0.0, 0.0);
    for (i, &wi) in w.iter().enumerate() {
        s += coeff[i] * wi;
    }
    s
}
