//! Quadrature for Galerkin panel-pair integrals with the weakly singular
//! Helmholtz kernel.
//!
//! Separated pairs use tensorized Gauss-Legendre rules collapsed onto each
//! triangle. Coincident, edge-sharing and vertex-sharing pairs use
//! relative-coordinate Duffy transforms: the four-dimensional integration
//! region is decomposed into cones on which the radial scale factors out of
//! `|x - y|` and cancels against the cone Jacobian, leaving a smooth
//! integrand on the unit hypercube.
//!
//! Each rule here only produces point pairs and weights; moment
//! accumulation (kernel and basis factors) happens in the caller, so split
//! and reordered triangles still see basis functions of the original
//! elements.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{phi_of_r, Wavenumber};

/// Quadrature configuration. `far_order`/`near_order` are the per-axis
/// Gauss-Legendre point counts on separated pairs (far means
/// distance/diameter above `near_threshold`), `duffy_points` the per-axis
/// count for the singular transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub far_order: usize,
    pub near_order: usize,
    pub duffy_points: usize,
    pub near_threshold: f64,
    /// Re-evaluate singular pairs at `duffy_points + 2` and fail if the two
    /// values disagree beyond [`SINGULAR_VALIDATION_TOL`] relative.
    pub validate_singular: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            far_order: 5,
            near_order: 8,
            // 8 points per axis puts the coincident rule at ~1e-7 relative
            // (6 points only reaches ~5e-6, short of the oracle tolerance).
            duffy_points: 8,
            near_threshold: 2.0,
            validate_singular: false,
        }
    }
}

/// Relative tolerance for the optional singular-rule convergence check.
pub const SINGULAR_VALIDATION_TOL: f64 = 1e-6;

/// A triangle in the screen plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tri {
    pub v: [[f64; 2]; 3],
}

impl Tri {
    pub fn new(v: [[f64; 2]; 3]) -> Self {
        Tri { v }
    }

    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.v;
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.v;
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn centroid(&self) -> [f64; 2] {
        let [a, b, c] = self.v;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Barycentric coordinates of `p` with respect to this triangle.
    pub fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.v;
        let two_a = 2.0 * self.signed_area();
        let l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / two_a;
        let l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / two_a;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Map simplex coordinates `0 <= u2 <= u1 <= 1` to the plane via
    /// `A + u1 (B - A) + u2 (C - B)`.
    fn chart(&self, u: [f64; 2]) -> [f64; 2] {
        let [a, b, c] = self.v;
        [
            a[0] + u[0] * (b[0] - a[0]) + u[1] * (c[0] - b[0]),
            a[1] + u[0] * (b[1] - a[1]) + u[1] * (c[1] - b[1]),
        ]
    }

    fn permuted(&self, p: [usize; 3]) -> Tri {
        Tri {
            v: [self.v[p[0]], self.v[p[1]], self.v[p[2]]],
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Minimum distance between two (disjoint or touching, non-overlapping)
/// triangles: attained at a vertex of one against an edge of the other.
pub fn triangle_distance(tp: &Tri, tq: &Tri) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            d = d.min(point_segment_distance(
                tp.v[i],
                tq.v[j],
                tq.v[(j + 1) % 3],
            ));
            d = d.min(point_segment_distance(
                tq.v[i],
                tp.v[j],
                tp.v[(j + 1) % 3],
            ));
        }
    }
    d
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton from the Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Cached quadrature points (with weights including the area Jacobian and
/// barycentric values) for one triangle: the collapsed `n x n` rule.
#[derive(Debug, Clone)]
pub struct ElemRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub bary: Vec<[f64; 3]>,
}

pub fn triangle_rule(tri: &Tri, n: usize) -> ElemRule {
    let (xs, ws) = gauss_legendre(n);
    let two_a = 2.0 * tri.area();
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    let mut bary = Vec::with_capacity(n * n);
    for (i, &a) in xs.iter().enumerate() {
        for (j, &b) in xs.iter().enumerate() {
            let u = [a, a * b];
            let p = tri.chart(u);
            points.push(p);
            weights.push(ws[i] * ws[j] * a * two_a);
            bary.push(tri.barycentric(p));
        }
    }
    ElemRule {
        points,
        weights,
        bary,
    }
}

// ---------------------------------------------------------------------------
// Pair classification
// ---------------------------------------------------------------------------

/// How a pair of elements touches; produced by the assembly layer from
/// vertex identities.
#[derive(Debug, Clone, PartialEq)]
pub enum PairClass {
    Coincident,
    /// Shared edge: local index pairs of the two shared vertices.
    SharedEdge([(usize, usize); 2]),
    /// Shared single vertex of both triangles.
    SharedVertex(usize, usize),
    /// A vertex of `q` lies in the interior of an edge of `p`; handled by
    /// splitting `p` at the touch point.
    VertexOnEdgeOfP { q_vertex: usize, p_edge: (usize, usize) },
    /// Mirror case: a vertex of `p` lies inside an edge of `q`.
    VertexOnEdgeOfQ { p_vertex: usize, q_edge: (usize, usize) },
    Separated,
}

/// Classify from explicitly identified vertices (same coordinates).
pub fn classify_from_shared(shared: &[(usize, usize)]) -> PairClass {
    match shared.len() {
        3 => PairClass::Coincident,
        2 => PairClass::SharedEdge([shared[0], shared[1]]),
        1 => PairClass::SharedVertex(shared[0].0, shared[0].1),
        _ => PairClass::Separated,
    }
}

/// For a pair with no identified vertices but (near-)zero distance, find the
/// vertex-in-edge contact. Returns `Separated` when the gap exceeds `tol`.
pub fn detect_point_touch(tp: &Tri, tq: &Tri, tol: f64) -> PairClass {
    if triangle_distance(tp, tq) > tol {
        return PairClass::Separated;
    }
    for qv in 0..3 {
        for e in 0..3 {
            let (a, b) = (e, (e + 1) % 3);
            if point_segment_distance(tq.v[qv], tp.v[a], tp.v[b]) <= tol {
                return PairClass::VertexOnEdgeOfP {
                    q_vertex: qv,
                    p_edge: (a, b),
                };
            }
        }
    }
    for pv in 0..3 {
        for e in 0..3 {
            let (a, b) = (e, (e + 1) % 3);
            if point_segment_distance(tp.v[pv], tq.v[a], tq.v[b]) <= tol {
                return PairClass::VertexOnEdgeOfQ {
                    p_vertex: pv,
                    q_edge: (a, b),
                };
            }
        }
    }
    PairClass::Separated
}

// ---------------------------------------------------------------------------
// Singular rules: point emission
// ---------------------------------------------------------------------------

/// Emit the Duffy-transformed point pairs for a coincident pair. The three
/// cones of the relative-coordinate hexagon each contribute the pair
/// `(u, u+z)` and its mirror `(u+z, u)`.
fn emit_coincident(t: &Tri, n: usize, f: &mut impl FnMut([f64; 2], [f64; 2], f64)) {
    let (xs, ws) = gauss_legendre(n);
    let jac = (2.0 * t.area()).powi(2);
    for (i1, &xi) in xs.iter().enumerate() {
        for (i2, &e1) in xs.iter().enumerate() {
            for (i3, &e2) in xs.iter().enumerate() {
                for (i4, &e3) in xs.iter().enumerate() {
                    let w =
                        ws[i1] * ws[i2] * ws[i3] * ws[i4] * xi * (1.0 - xi).powi(2) * e2 * jac;
                    let pairs = [
                        ([(1.0 - xi) * e2, (1.0 - xi) * e2 * e3], [xi, xi * e1]),
                        (
                            [xi * (1.0 - e1) + (1.0 - xi) * e2, (1.0 - xi) * e2 * e3],
                            [xi * e1, xi],
                        ),
                        (
                            [xi + e2 * (1.0 - xi), e2 * e3 * (1.0 - xi)],
                            [-xi * e1, xi * (1.0 - e1)],
                        ),
                    ];
                    for (u, z) in pairs {
                        let uz = [u[0] + z[0], u[1] + z[1]];
                        let x = t.chart(u);
                        let y = t.chart(uz);
                        f(x, y, w);
                        f(y, x, w);
                    }
                }
            }
        }
    }
}

/// Emit point pairs for triangles sharing the edge `P0P1 = Q0Q1` (triangles
/// already reordered). Six cones: for each of the two orderings of the edge
/// variables, the dominant relative coordinate is the edge offset, the inner
/// height of `p`, or the inner height of `q`.
fn emit_shared_edge(tp: &Tri, tq: &Tri, n: usize, f: &mut impl FnMut([f64; 2], [f64; 2], f64)) {
    let (xs, ws) = gauss_legendre(n);
    let jac = 4.0 * tp.area() * tq.area();
    for (i1, &rho) in xs.iter().enumerate() {
        for (i2, &ze) in xs.iter().enumerate() {
            for (i3, &al) in xs.iter().enumerate() {
                for (i4, &be) in xs.iter().enumerate() {
                    let base = ws[i1] * ws[i2] * ws[i3] * ws[i4] * rho.powi(3) * ze * ze * jac;
                    let w_t = base * (1.0 - ze);
                    let w_mn = base * (1.0 - ze * al);
                    let s = rho * (1.0 - ze);
                    let sa = rho * (1.0 - ze * al);
                    // (u in p, v in q): v1 >= u1 family.
                    let fam_plus = [
                        ([s, s * ze * al], [rho, rho * ze * be], w_t),
                        ([sa, sa * ze], [rho, rho * ze * be], w_mn),
                        ([sa, sa * ze * be], [rho, rho * ze], w_mn),
                    ];
                    for (u, v, w) in fam_plus {
                        f(tp.chart(u), tq.chart(v), w);
                        // Mirror family u1 > v1: swap the roles of u and v.
                        f(tp.chart(v), tq.chart(u), w);
                    }
                }
            }
        }
    }
}

/// Emit point pairs for triangles sharing the single vertex `P0 = Q0`.
fn emit_shared_vertex(tp: &Tri, tq: &Tri, n: usize, f: &mut impl FnMut([f64; 2], [f64; 2], f64)) {
    let (xs, ws) = gauss_legendre(n);
    let jac = 4.0 * tp.area() * tq.area();
    for (i1, &xi) in xs.iter().enumerate() {
        for (i2, &e1) in xs.iter().enumerate() {
            for (i3, &e2) in xs.iter().enumerate() {
                for (i4, &e3) in xs.iter().enumerate() {
                    let w = ws[i1] * ws[i2] * ws[i3] * ws[i4] * xi.powi(3) * e2 * jac;
                    let big = [xi, xi * e1];
                    let small = [xi * e2, xi * e2 * e3];
                    f(tp.chart(big), tq.chart(small), w);
                    f(tp.chart(small), tq.chart(big), w);
                }
            }
        }
    }
}

/// Emit singular-rule points for a touching pair, reordering (and if needed
/// splitting) triangles so the contact is canonical. `shared` lists local
/// vertex index pairs identified between `tp` and `tq`.
pub fn emit_singular_pair_points(
    tp: &Tri,
    tq: &Tri,
    class: &PairClass,
    n: usize,
    f: &mut impl FnMut([f64; 2], [f64; 2], f64),
) {
    match class {
        PairClass::Coincident => emit_coincident(tp, n, f),
        PairClass::SharedEdge([(p0, q0), (p1, q1)]) => {
            let perm_p = [*p0, *p1, 3 - p0 - p1];
            let perm_q = [*q0, *q1, 3 - q0 - q1];
            emit_shared_edge(&tp.permuted(perm_p), &tq.permuted(perm_q), n, f);
        }
        PairClass::SharedVertex(p0, q0) => {
            // Cyclic permutations keep the original orientation.
            let perm = |i: usize| [i, (i + 1) % 3, (i + 2) % 3];
            emit_shared_vertex(&tp.permuted(perm(*p0)), &tq.permuted(perm(*q0)), n, f);
        }
        PairClass::VertexOnEdgeOfP { q_vertex, p_edge } => {
            let w = tq.v[*q_vertex];
            let (a, b) = *p_edge;
            let c = 3 - a - b;
            let perm = |i: usize| [i, (i + 1) % 3, (i + 2) % 3];
            let tq_c = tq.permuted(perm(*q_vertex));
            for sub in [
                Tri::new([w, tp.v[b], tp.v[c]]),
                Tri::new([w, tp.v[c], tp.v[a]]),
            ] {
                if sub.area() > 1e-14 * tp.area() {
                    emit_shared_vertex(&sub, &tq_c, n, f);
                }
            }
        }
        PairClass::VertexOnEdgeOfQ { p_vertex, q_edge } => {
            let w = tp.v[*p_vertex];
            let (a, b) = *q_edge;
            let c = 3 - a - b;
            let perm = |i: usize| [i, (i + 1) % 3, (i + 2) % 3];
            let tp_c = tp.permuted(perm(*p_vertex));
            for sub in [
                Tri::new([w, tq.v[b], tq.v[c]]),
                Tri::new([w, tq.v[c], tq.v[a]]),
            ] {
                if sub.area() > 1e-14 * tq.area() {
                    // Swap roles so the first argument is still a piece of q.
                    emit_shared_vertex_swapped(&tp_c, &sub, n, f);
                }
            }
        }
        PairClass::Separated => panic!("separated pairs use cached tensor rules"),
    }
}

/// Like [`emit_shared_vertex`] with `p` points produced from the first
/// triangle and `q` points from the second.
fn emit_shared_vertex_swapped(
    tp: &Tri,
    tq_piece: &Tri,
    n: usize,
    f: &mut impl FnMut([f64; 2], [f64; 2], f64),
) {
    emit_shared_vertex(tq_piece, tp, n, &mut |y, x, w| f(x, y, w));
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// Pair moments: `s00 = \int\int Phi`, `s1[i][j] = \int\int Phi l_i(x) l_j(y)`
/// with `l` the barycentric hats of the original triangles (x in `tp`,
/// y in `tq`).
#[derive(Debug, Clone, Copy)]
pub struct PairMoments {
    pub s00: Complex64,
    pub s1: [[Complex64; 3]; 3],
}

impl PairMoments {
    fn zero() -> Self {
        PairMoments {
            s00: Complex64::new(0.0, 0.0),
            s1: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }
}

/// Moments of a separated pair from cached per-element rules.
pub fn separated_moments(
    rp: &ElemRule,
    rq: &ElemRule,
    k: Wavenumber,
    want_hats: bool,
) -> PairMoments {
    let mut m = PairMoments::zero();
    for (ip, xp) in rp.points.iter().enumerate() {
        let wp = rp.weights[ip];
        let bp = rp.bary[ip];
        for (iq, yq) in rq.points.iter().enumerate() {
            let w = wp * rq.weights[iq];
            let r = dist(*xp, *yq);
            let phi = phi_of_r(k, r) * w;
            m.s00 += phi;
            if want_hats {
                let bq = rq.bary[iq];
                for i in 0..3 {
                    let pi = phi * bp[i];
                    for j in 0..3 {
                        m.s1[i][j] += pi * bq[j];
                    }
                }
            }
        }
    }
    m
}

fn singular_moments_at(
    tp: &Tri,
    tq: &Tri,
    class: &PairClass,
    k: Wavenumber,
    n: usize,
    want_hats: bool,
) -> PairMoments {
    let mut m = PairMoments::zero();
    emit_singular_pair_points(tp, tq, class, n, &mut |x, y, w| {
        let r = dist(x, y);
        let phi = phi_of_r(k, r) * w;
        m.s00 += phi;
        if want_hats {
            let bp = tp.barycentric(x);
            let bq = tq.barycentric(y);
            for i in 0..3 {
                let pi = phi * bp[i];
                for j in 0..3 {
                    m.s1[i][j] += pi * bq[j];
                }
            }
        }
    });
    m
}

fn class_name(class: &PairClass) -> &'static str {
    match class {
        PairClass::Coincident => "coincident",
        PairClass::SharedEdge(_) => "shared-edge",
        PairClass::SharedVertex(..) => "shared-vertex",
        PairClass::VertexOnEdgeOfP { .. } | PairClass::VertexOnEdgeOfQ { .. } => "vertex-on-edge",
        PairClass::Separated => "separated",
    }
}

/// Classify two standalone triangles geometrically: vertices within
/// `1e-12 * scale` are identified, then touching contacts are detected by
/// distance.
pub fn classify_pair(tp: &Tri, tq: &Tri) -> PairClass {
    let scale = tp.diameter().max(tq.diameter());
    let tol = 1e-12 * (1.0 + scale);
    let mut shared = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if dist(tp.v[i], tq.v[j]) <= tol {
                shared.push((i, j));
            }
        }
    }
    if !shared.is_empty() {
        return classify_from_shared(&shared);
    }
    detect_point_touch(tp, tq, tol)
}

/// The plain pair integral `\int_{T_p} \int_{T_q} Phi(x, y) ds(y) ds(x)`,
/// dispatching between the tensor rules (separated pairs, near/far by
/// distance over diameter) and the Duffy transforms (touching pairs).
pub fn panel_pair_integral(
    tp: &Tri,
    tq: &Tri,
    k: Wavenumber,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    match classify_pair(tp, tq) {
        PairClass::Separated => {
            let scale = tp.diameter().max(tq.diameter());
            let order = if triangle_distance(tp, tq) > opts.near_threshold * scale {
                opts.far_order
            } else {
                opts.near_order
            };
            let rp = triangle_rule(tp, order);
            let rq = triangle_rule(tq, order);
            Ok(separated_moments(&rp, &rq, k, false).s00)
        }
        class => Ok(singular_moments(tp, tq, &class, k, opts, false)?.s00),
    }
}

/// Moments of a touching pair, with the optional order-escalation check.
pub fn singular_moments(
    tp: &Tri,
    tq: &Tri,
    class: &PairClass,
    k: Wavenumber,
    opts: &QuadratureOptions,
    want_hats: bool,
) -> Result<PairMoments> {
    let n = opts.duffy_points.max(1);
    let m = singular_moments_at(tp, tq, class, k, n, want_hats);
    if opts.validate_singular {
        let m2 = singular_moments_at(tp, tq, class, k, n + 2, want_hats);
        let denom = m2.s00.norm().max(1e-300);
        let estimate = (m2.s00 - m.s00).norm() / denom;
        if estimate > SINGULAR_VALIDATION_TOL {
            return Err(Error::Quadrature {
                case: class_name(class),
                estimate,
            });
        }
        return Ok(m2);
    }
    Ok(m)
}
