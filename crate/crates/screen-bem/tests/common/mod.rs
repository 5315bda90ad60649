//! Shared test support: an adaptive-cubature oracle for panel-pair
//! integrals that is independent of the production quadrature path.
//!
//! The inner integral over the source triangle is computed by a signed-fan
//! Duffy rule centered at the observation point (any polygon integral is a
//! signed sum of apex triangles, and the apex collapse removes the 1/r
//! singularity); the outer integral uses adaptive subdivision driven by a
//! symmetric 7-point rule. The production code instead uses
//! relative-coordinate transforms over the four-dimensional product, so the
//! two routes share no code beyond the kernel definition.

use num_complex::Complex64;
use screen_bem::kernel::{phi, Wavenumber};
use screen_bem::quadrature::{gauss_legendre, Tri};

/// Degree-5 symmetric 7-point rule in barycentric coordinates.
const DUNAVANT7: [(f64, f64, f64); 7] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059715871789769820, 0.470142064105115090, 0.132394152788506180),
    (0.470142064105115090, 0.059715871789769820, 0.132394152788506180),
    (0.470142064105115090, 0.470142064105115090, 0.132394152788506180),
    (0.797426985353087320, 0.101286507323456340, 0.125939180544827150),
    (0.101286507323456340, 0.797426985353087320, 0.125939180544827150),
    (0.101286507323456340, 0.101286507323456340, 0.125939180544827150),
];

fn kernel(k: Wavenumber, x: [f64; 2], y: [f64; 2]) -> Complex64 {
    phi([x[0], x[1], 0.0], [y[0], y[1], 0.0], k).expect("oracle points never coincide")
}

/// Inner integrand weights: 1 and the three barycentric hats of `tq`.
#[derive(Clone, Copy, Default)]
pub struct InnerMoments {
    pub m0: Complex64,
    pub m1: [Complex64; 3],
}

/// `\int_{tq} Phi(x, y) (1, hats(y)) ds(y)` by signed-fan Duffy from `x`.
fn inner_fan_duffy(x: [f64; 2], tq: &Tri, k: Wavenumber, n: usize) -> InnerMoments {
    let (gx, gw) = gauss_legendre(n);
    let mut out = InnerMoments::default();
    for e in 0..3 {
        let a = tq.v[e];
        let b = tq.v[(e + 1) % 3];
        // Signed area of the fan triangle (x, a, b).
        let two_area = (a[0] - x[0]) * (b[1] - x[1]) - (b[0] - x[0]) * (a[1] - x[1]);
        if two_area.abs() < 1e-300 {
            continue;
        }
        for (i, &u) in gx.iter().enumerate() {
            for (j, &v) in gx.iter().enumerate() {
                // y = x + u * ((a - x) + v * (b - a)); Jacobian u * |2A|.
                let y = [
                    x[0] + u * ((a[0] - x[0]) + v * (b[0] - a[0])),
                    x[1] + u * ((a[1] - x[1]) + v * (b[1] - a[1])),
                ];
                let w = gw[i] * gw[j] * u * two_area;
                let ph = kernel(k, x, y) * w;
                out.m0 += ph;
                let lam = tq.barycentric(y);
                for m in 0..3 {
                    out.m1[m] += ph * lam[m];
                }
            }
        }
    }
    out
}

fn inner_tensor(x: [f64; 2], tq: &Tri, k: Wavenumber, n: usize) -> InnerMoments {
    let rule = screen_bem::quadrature::triangle_rule(tq, n);
    let mut out = InnerMoments::default();
    for (i, y) in rule.points.iter().enumerate() {
        let ph = kernel(k, x, *y) * rule.weights[i];
        out.m0 += ph;
        for m in 0..3 {
            out.m1[m] += ph * rule.bary[i][m];
        }
    }
    out
}

fn inner(x: [f64; 2], tq: &Tri, k: Wavenumber) -> InnerMoments {
    if screen_bem::quadrature::triangle_distance(&Tri::new([x, x, x]), tq) < tq.diameter() {
        inner_fan_duffy(x, tq, k, 16)
    } else {
        inner_tensor(x, tq, k, 12)
    }
}

/// Full pair moments the oracle computes: `s00` and the 3x3 hat moments.
#[derive(Clone, Copy, Default)]
pub struct OracleMoments {
    pub s00: Complex64,
    pub s1: [[Complex64; 3]; 3],
}

fn rule7(tp_piece: &Tri, tp: &Tri, tq: &Tri, k: Wavenumber) -> OracleMoments {
    let mut out = OracleMoments::default();
    let area = tp_piece.area();
    for &(l1, l2, w) in &DUNAVANT7 {
        let x = [
            tp_piece.v[0][0]
                + l1 * (tp_piece.v[1][0] - tp_piece.v[0][0])
                + l2 * (tp_piece.v[2][0] - tp_piece.v[0][0]),
            tp_piece.v[0][1]
                + l1 * (tp_piece.v[1][1] - tp_piece.v[0][1])
                + l2 * (tp_piece.v[2][1] - tp_piece.v[0][1]),
        ];
        let innerm = inner(x, tq, k);
        let lam_x = tp.barycentric(x);
        let wt = w * area;
        out.s00 += innerm.m0 * wt;
        for i in 0..3 {
            for j in 0..3 {
                out.s1[i][j] += innerm.m1[j] * (wt * lam_x[i]);
            }
        }
    }
    out
}

fn split4(t: &Tri) -> [Tri; 4] {
    let m01 = mid(t.v[0], t.v[1]);
    let m12 = mid(t.v[1], t.v[2]);
    let m20 = mid(t.v[2], t.v[0]);
    [
        Tri::new([t.v[0], m01, m20]),
        Tri::new([m01, t.v[1], m12]),
        Tri::new([m20, m12, t.v[2]]),
        Tri::new([m01, m12, m20]),
    ]
}

fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
}

fn add(a: &mut OracleMoments, b: &OracleMoments) {
    a.s00 += b.s00;
    for i in 0..3 {
        for j in 0..3 {
            a.s1[i][j] += b.s1[i][j];
        }
    }
}

fn adaptive(
    piece: &Tri,
    tp: &Tri,
    tq: &Tri,
    k: Wavenumber,
    tol: f64,
    depth: usize,
) -> OracleMoments {
    let coarse = rule7(piece, tp, tq, k);
    let mut fine = OracleMoments::default();
    for child in split4(piece) {
        add(&mut fine, &rule7(&child, tp, tq, k));
    }
    let err = (fine.s00 - coarse.s00).norm();
    if depth >= 20 || err <= tol {
        return fine;
    }
    let mut out = OracleMoments::default();
    for child in split4(piece) {
        add(&mut out, &adaptive(&child, tp, tq, k, tol / 4.0, depth + 1));
    }
    out
}

/// Oracle for `\int\int Phi` and the hat moments, to roughly `tol` absolute
/// on `s00`.
pub fn oracle_pair_moments(tp: &Tri, tq: &Tri, k: Wavenumber, tol: f64) -> OracleMoments {
    adaptive(tp, tp, tq, k, tol, 0)
}

pub fn oracle_pair_integral(tp: &Tri, tq: &Tri, k: Wavenumber, tol: f64) -> Complex64 {
    oracle_pair_moments(tp, tq, k, tol).s00
}
