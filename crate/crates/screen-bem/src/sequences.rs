//! Variational solves and convergence studies over nested screen sequences.
//!
//! Decreasing (Dirichlet) runs solve the single-layer problem on shrinking
//! Cantor-dust screens; increasing (Neumann) runs solve the hypersingular
//! problem on growing Sierpinski-complement screens. Differences between
//! consecutive solutions are measured in the energy norm of a common
//! superspace: for the dust with a base-`q` ratio the level-`j` screen is
//! remeshed on the `q`-grid so that level-`(j+1)` elements reappear
//! verbatim; for the complement family the level-`j` space is literally a
//! coefficient prefix of the level-`(j+1)` space.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_hypersingular, assemble_single_layer, matrix_diagnostics, one_functional,
    BoundaryData, GalerkinSystem, ProblemKind,
};
use crate::error::{Error, Result};
use crate::geometry::{
    cantor_dust_prefractal, rational_ratio, sierpinski_complement_screen, sierpinski_prefractal,
};
use crate::kernel::Wavenumber;
use crate::linalg;
use crate::mesh::{mesh_panels_with, MeshOptions, DEFAULT_ELEMENT_CAP};
use crate::metrics::{hs_norm, HsNormSpec};
use crate::quadrature::QuadratureOptions;
use crate::spaces::{p0_prolongation, p1_prolongation, FunctionSpace, Prolongation, SpaceKind};

/// A solved discrete variational problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coefficients: DVector<Complex64>,
    pub problem: ProblemKind,
    pub energy_norm: f64,
}

/// Solve the assembled system by dense factorization; the relative residual
/// contract is enforced inside.
pub fn solve(system: &GalerkinSystem) -> Result<Solution> {
    let coefficients = linalg::solve_dense(&system.matrix, &system.rhs)?;
    let energy_norm = linalg::energy_norm_of(&system.matrix, &coefficients);
    Ok(Solution {
        coefficients,
        problem: system.problem,
        energy_norm,
    })
}

// ---------------------------------------------------------------------------
// Verdict rule
// ---------------------------------------------------------------------------

/// Frozen thresholds of the trend verdict.
pub const VERDICT_DECAY_RATIO: f64 = 0.9;
pub const VERDICT_LAST_RATIO: f64 = 0.95;
pub const VERDICT_SPREAD: f64 = 0.10;
pub const VERDICT_NONZERO_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergesToZero,
    ConvergesToNonzero,
    Inconclusive,
}

/// Trend diagnostics of the per-level scalar `q_j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendDiagnostics {
    /// Which scalar the verdict was computed on.
    pub quantity: String,
    /// Consecutive ratios `q_{j+1}/q_j` (absent when the predecessor is 0).
    pub ratios: Vec<Option<f64>>,
    /// `exp(slope)` of the least-squares fit of `ln q_j` against `j`.
    pub fitted_ratio: Option<f64>,
    pub last_ratio: Option<f64>,
    /// `(max - min)/q_J` over the last three values.
    pub spread_last3: Option<f64>,
    /// Projected total remaining decrease, from geometric continuation of
    /// the decrements; this is what the final value would be if the
    /// sequence were heading to zero at the observed rate.
    pub zero_trend_extrapolation: f64,
    /// `q_J` minus the projected remaining decrease.
    pub extrapolated_limit: f64,
    pub verdict: Verdict,
}

/// Apply the frozen verdict rule to a positive (in exact arithmetic)
/// sequence of per-level scalars.
///
/// `ConvergesToZero`: fitted consecutive ratio at most 0.9 and last ratio
/// at most 0.95. `ConvergesToNonzero`: the last three values spread at most
/// 10% and the final value at least 10 times the projected remaining
/// decrease. Anything else is `Inconclusive`; identically zero data counts
/// as converged to zero.
pub fn assess_trend(quantity: &str, q: &[f64]) -> TrendDiagnostics {
    let n = q.len();
    let scale = q.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale <= 1e-14 {
        return TrendDiagnostics {
            quantity: quantity.into(),
            ratios: vec![None; n.saturating_sub(1)],
            fitted_ratio: None,
            last_ratio: None,
            spread_last3: None,
            zero_trend_extrapolation: 0.0,
            extrapolated_limit: 0.0,
            verdict: Verdict::ConvergesToZero,
        };
    }

    let ratios: Vec<Option<f64>> = q
        .windows(2)
        .map(|w| (w[0].abs() > 1e-300).then(|| w[1] / w[0]))
        .collect();
    let last_ratio = ratios.last().copied().flatten();

    let fitted_ratio = if q.iter().all(|&v| v > 0.0) && n >= 2 {
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ys: Vec<f64> = q.iter().map(|v| v.ln()).collect();
        let nf = n as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        Some(((nf * sxy - sx * sy) / (nf * sxx - sx * sx)).exp())
    } else {
        None
    };

    let spread_last3 = (n >= 3 && q[n - 1].abs() > 1e-300).then(|| {
        let tail = &q[n - 3..];
        let mx = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        (mx - mn) / q[n - 1].abs()
    });

    // Geometric continuation of the decrements d_j = q_{j-1} - q_j.
    let zero_trend_extrapolation = if n >= 2 {
        let d_last = q[n - 2] - q[n - 1];
        if d_last <= 0.0 {
            0.0
        } else {
            let rho = if n >= 3 && q[n - 3] - q[n - 2] > 0.0 {
                (d_last / (q[n - 3] - q[n - 2])).clamp(1e-6, 0.95)
            } else {
                0.5
            };
            d_last * rho / (1.0 - rho)
        }
    } else {
        0.0
    };

    let to_zero = matches!(fitted_ratio, Some(r) if r <= VERDICT_DECAY_RATIO)
        && matches!(last_ratio, Some(r) if r <= VERDICT_LAST_RATIO);
    let to_nonzero = matches!(spread_last3, Some(s) if s <= VERDICT_SPREAD)
        && q[n - 1] > 0.0
        && q[n - 1] >= VERDICT_NONZERO_FACTOR * zero_trend_extrapolation;

    let verdict = if to_zero {
        Verdict::ConvergesToZero
    } else if to_nonzero {
        Verdict::ConvergesToNonzero
    } else {
        Verdict::Inconclusive
    };

    TrendDiagnostics {
        quantity: quantity.into(),
        ratios,
        fitted_ratio,
        last_ratio,
        spread_last3,
        zero_trend_extrapolation,
        extrapolated_limit: q[n - 1] - zero_trend_extrapolation,
        verdict,
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub dofs: usize,
    pub energy_norm: f64,
    /// Energy-norm distance to the previous level's solution in the common
    /// superspace.
    pub diff_prev: Option<f64>,
    /// Same difference measured in the truncated Fourier `H^s` norm.
    pub diff_prev_hs: Option<f64>,
    /// `<1, density>` for the capacity special case (Dirichlet, k = i,
    /// unit data).
    pub capacity: Option<f64>,
    pub coercivity_est: Option<f64>,
    pub continuity_est: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub alpha: Option<f64>,
    pub problem: ProblemKind,
    pub wavenumber_re: f64,
    pub wavenumber_im: f64,
    pub data: BoundaryData,
    pub refine: u32,
    pub levels: Vec<LevelRecord>,
    pub trend: TrendDiagnostics,
    /// How cross-level differences were computed (or why they were not).
    pub comparison: String,
    /// Neumann runs: energy-norm gap between the last-level solution and
    /// the solution on the filled screen `int(F_0)`, solved in the host
    /// space. Reported, never thresholded.
    pub phi_star_gap: Option<f64>,
    pub phi_star_dofs: Option<usize>,
    pub code_version: String,
}

impl ConvergenceReport {
    /// CSV table, one row per level:
    /// `j,dofs,energy_norm,diff_prev,capacity,c_h,C_h`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,dofs,energy_norm,diff_prev,capacity,c_h,C_h\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                l.level,
                l.dofs,
                l.energy_norm,
                fmt(l.diff_prev),
                fmt(l.capacity),
                fmt(l.coercivity_est),
                fmt(l.continuity_est),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Harness configuration shared by both sequence directions.
#[derive(Debug, Clone)]
pub struct SequenceOptions {
    pub refine: u32,
    pub quadrature: QuadratureOptions,
    /// Cap on dofs of any solved system.
    pub dof_cap: usize,
    /// Cap on elements of any mesh, including difference hosts.
    pub element_cap: usize,
    /// Also measure cross-level differences in the Fourier norm (slow).
    pub hs_diffs: bool,
    /// Compute per-level continuity/coercivity estimates.
    pub diagnostics: bool,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            refine: 0,
            quadrature: QuadratureOptions::default(),
            dof_cap: 2000,
            element_cap: DEFAULT_ELEMENT_CAP,
            hs_diffs: false,
            diagnostics: true,
        }
    }
}

fn is_capacity_case(problem: ProblemKind, data: &BoundaryData, k: Wavenumber) -> bool {
    problem == ProblemKind::DirichletJump
        && k.value() == Complex64::new(0.0, 1.0)
        && matches!(data, BoundaryData::Constant { re, im } if *re == 1.0 && *im == 0.0)
}

fn energy_diff(
    a: &nalgebra::DMatrix<Complex64>,
    x: &DVector<Complex64>,
    y: &DVector<Complex64>,
) -> f64 {
    let w = x - y;
    linalg::energy_norm_of(a, &w)
}

// ---------------------------------------------------------------------------
// Decreasing (Dirichlet) sequences
// ---------------------------------------------------------------------------

/// Dirichlet solves on the shrinking dust screens `j = 1..j_max` with P0
/// elements, a fixed per-panel refinement and fixed quadrature. For
/// base-`q` ratios, consecutive solutions are compared in the level-`j`
/// host space meshed on the `q`-grid; otherwise only scalar functionals
/// are compared and the report says so.
pub fn solve_decreasing_sequence(
    alpha: f64,
    j_max: u32,
    data: &BoundaryData,
    k: Wavenumber,
    opts: &SequenceOptions,
) -> Result<ConvergenceReport> {
    if j_max < 2 {
        return Err(Error::domain("decreasing sequences need j_max >= 2"));
    }
    data.validate()?;
    let rational = rational_ratio(alpha);
    let capacity_case = is_capacity_case(ProblemKind::DirichletJump, data, k);

    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut scalars: Vec<f64> = Vec::new();
    let mut prev: Option<(u32, GalerkinSystem, Solution)> = None;
    let mut comparison = match rational {
        Some((_, q)) => format!("energy-norm differences in the level-j host remeshed on the {q}-grid"),
        None => "ratio not of the form p/q with small q: scalar functionals only".to_string(),
    };

    for j in 1..=j_max {
        let screen = cantor_dust_prefractal(alpha, j as i64)?;
        let mesh = mesh_panels_with(
            &screen,
            &MeshOptions {
                refine: opts.refine,
                grid: 1,
                element_cap: opts.element_cap,
            },
        )?;
        let space = FunctionSpace::new(mesh, SpaceKind::P0Jump)?;
        if space.dof_count() > opts.dof_cap {
            return Err(Error::Capacity {
                required: space.dof_count(),
                cap: opts.dof_cap,
            });
        }
        let system = GalerkinSystem::build(
            space,
            k,
            ProblemKind::DirichletJump,
            data,
            &opts.quadrature,
        )?;
        let sol = solve(&system)?;
        let capacity = capacity_case.then(|| one_functional(&system.space, &sol.coefficients).re);

        let (diff_prev, diff_prev_hs) = match (&prev, rational) {
            (Some((_, prev_sys, prev_sol)), Some((_, q))) => {
                match decreasing_diff(
                    alpha,
                    j - 1,
                    q as u32,
                    prev_sys,
                    prev_sol,
                    &system,
                    &sol,
                    k,
                    opts,
                )? {
                    Some(d) => d,
                    None => {
                        comparison = format!(
                            "host mesh over the element cap from level {}; scalar functionals only",
                            j - 1
                        );
                        (None, None)
                    }
                }
            }
            _ => (None, None),
        };

        let (c_h, big_c_h) = if opts.diagnostics {
            let d = matrix_diagnostics(&system.matrix);
            (Some(d.coercivity_est), Some(d.continuity_est))
        } else {
            (None, None)
        };

        scalars.push(match capacity {
            Some(c) => c,
            None => sol.energy_norm,
        });
        levels.push(LevelRecord {
            level: j,
            dofs: system.dof_count(),
            energy_norm: sol.energy_norm,
            diff_prev,
            diff_prev_hs,
            capacity,
            coercivity_est: c_h,
            continuity_est: big_c_h,
        });
        prev = Some((j, system, sol));
    }

    let trend = assess_trend(
        if capacity_case { "capacity" } else { "energy_norm" },
        &scalars,
    );
    Ok(ConvergenceReport {
        family: "cantor_dust".into(),
        alpha: Some(alpha),
        problem: ProblemKind::DirichletJump,
        wavenumber_re: k.value().re,
        wavenumber_im: k.value().im,
        data: data.clone(),
        refine: opts.refine,
        levels,
        trend,
        comparison,
        phi_star_gap: None,
        phi_star_dofs: None,
        code_version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Energy (and optional Fourier) distance between the solutions of levels
/// `j` and `j+1`, evaluated in the grid-aligned host remesh of level `j`.
/// Returns `Ok(None)` when the host would exceed the element cap.
#[allow(clippy::too_many_arguments)]
fn decreasing_diff(
    alpha: f64,
    prev_level: u32,
    q: u32,
    prev_sys: &GalerkinSystem,
    prev_sol: &Solution,
    cur_sys: &GalerkinSystem,
    cur_sol: &Solution,
    k: Wavenumber,
    opts: &SequenceOptions,
) -> Result<Option<(Option<f64>, Option<f64>)>> {
    let screen = cantor_dust_prefractal(alpha, prev_level as i64)?;
    let host_mesh = match mesh_panels_with(
        &screen,
        &MeshOptions {
            refine: opts.refine,
            grid: q,
            element_cap: opts.element_cap,
        },
    ) {
        Ok(m) => m,
        Err(Error::Capacity { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let host = FunctionSpace::new(host_mesh, SpaceKind::P0Jump)?;
    let p_prev = p0_prolongation(&prev_sys.space, &host)?;
    let p_cur = p0_prolongation(&cur_sys.space, &host)?;
    // The host refines both meshes; every host element must be covered by
    // the previous level and the next level only vanishes on removed panels.
    debug_assert!(p_prev.rows.iter().all(|r| r.len() == 1));
    let a_host = assemble_single_layer(&host, k, &opts.quadrature)?;
    let up = DVector::from_vec(p_prev.apply(prev_sol.coefficients.as_slice()));
    let uc = DVector::from_vec(p_cur.apply(cur_sol.coefficients.as_slice()));
    let d = energy_diff(&a_host, &up, &uc);
    let d_hs = if opts.hs_diffs {
        let w: Vec<Complex64> = up
            .iter()
            .zip(uc.iter())
            .map(|(a, b)| a - b)
            .collect();
        let spec = HsNormSpec::new(-0.5)?;
        Some(hs_norm(&host, &w, &spec)?.value)
    } else {
        None
    };
    Ok(Some((Some(d), d_hs)))
}

// ---------------------------------------------------------------------------
// Increasing (Neumann) sequences
// ---------------------------------------------------------------------------

/// Neumann solves on the growing complement screens `j = 1..j_max` with
/// zero-trace P1 elements. Level `j` panels persist verbatim at level
/// `j+1`, so consecutive spaces nest by coefficient prefix and Cauchy
/// differences need no remeshing. Additionally solves on the filled
/// screen `int(F_0)` in the common host space and reports the gap.
pub fn solve_increasing_sequence(
    j_max: u32,
    data: &BoundaryData,
    k: Wavenumber,
    opts: &SequenceOptions,
) -> Result<ConvergenceReport> {
    if j_max < 2 {
        return Err(Error::domain("increasing sequences need j_max >= 2"));
    }
    data.validate()?;

    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut scalars: Vec<f64> = Vec::new();
    let mut prev: Option<(GalerkinSystem, Solution)> = None;
    let mut last: Option<(GalerkinSystem, Solution)> = None;

    for j in 1..=j_max {
        let screen = sierpinski_complement_screen(j as i64)?;
        let mesh = mesh_panels_with(
            &screen,
            &MeshOptions {
                refine: opts.refine,
                grid: 1,
                element_cap: opts.element_cap,
            },
        )?;
        let space = FunctionSpace::new(mesh, SpaceKind::P1ZeroTrace)?;
        if space.dof_count() > opts.dof_cap {
            return Err(Error::Capacity {
                required: space.dof_count(),
                cap: opts.dof_cap,
            });
        }
        let system =
            GalerkinSystem::build(space, k, ProblemKind::NeumannJump, data, &opts.quadrature)?;
        let sol = solve(&system)?;

        let (diff_prev, diff_prev_hs) = if let Some((prev_sys, prev_sol)) = &prev {
            let np = prev_sys.dof_count();
            // Panels persist in order, so the previous dofs are a prefix.
            debug_assert!((0..np).all(|d| {
                system.space.mesh.vertices[system.space.vertex_of_dof(d)]
                    == prev_sys.space.mesh.vertices[prev_sys.space.vertex_of_dof(d)]
            }));
            let mut ext = DVector::from_element(system.dof_count(), Complex64::new(0.0, 0.0));
            for d in 0..np {
                ext[d] = prev_sol.coefficients[d];
            }
            let d = energy_diff(&system.matrix, &ext, &sol.coefficients);
            let d_hs = if opts.hs_diffs {
                let w: Vec<Complex64> = (0..system.dof_count())
                    .map(|i| ext[i] - sol.coefficients[i])
                    .collect();
                let spec = HsNormSpec::new(0.5)?;
                Some(hs_norm(&system.space, &w, &spec)?.value)
            } else {
                None
            };
            (Some(d), d_hs)
        } else {
            (None, None)
        };

        let (c_h, big_c_h) = if opts.diagnostics {
            let d = matrix_diagnostics(&system.matrix);
            (Some(d.coercivity_est), Some(d.continuity_est))
        } else {
            (None, None)
        };

        scalars.push(sol.energy_norm);
        levels.push(LevelRecord {
            level: j,
            dofs: system.dof_count(),
            energy_norm: sol.energy_norm,
            diff_prev,
            diff_prev_hs,
            capacity: None,
            coercivity_est: c_h,
            continuity_est: big_c_h,
        });
        if j == j_max {
            last = Some((system, sol));
            prev = None;
        } else {
            prev = Some((system, sol));
        }
    }

    // The filled screen int(F_0) hosted at refine + j_max, so both the
    // last-level panel meshes and its own refine nest into it.
    let (phi_star_gap, phi_star_dofs) = match filled_screen_gap(j_max, data, k, opts, &last)? {
        Some((gap, dofs)) => (Some(gap), Some(dofs)),
        None => (None, None),
    };

    let trend = assess_trend("energy_norm", &scalars);
    Ok(ConvergenceReport {
        family: "sierpinski_complement".into(),
        alpha: None,
        problem: ProblemKind::NeumannJump,
        wavenumber_re: k.value().re,
        wavenumber_im: k.value().im,
        data: data.clone(),
        refine: opts.refine,
        levels,
        trend,
        comparison: "energy-norm differences by prefix embedding of nested P1 spaces".into(),
        phi_star_gap,
        phi_star_dofs,
        code_version: env!("CARGO_PKG_VERSION").into(),
    })
}

fn filled_screen_gap(
    j_max: u32,
    data: &BoundaryData,
    k: Wavenumber,
    opts: &SequenceOptions,
    last: &Option<(GalerkinSystem, Solution)>,
) -> Result<Option<(f64, usize)>> {
    let Some((last_sys, last_sol)) = last else {
        return Ok(None);
    };
    let mut filled = sierpinski_prefractal(0)?;
    filled.open = true;
    let host_mesh = match mesh_panels_with(
        &filled,
        &MeshOptions {
            refine: opts.refine + j_max,
            grid: 1,
            element_cap: opts.element_cap,
        },
    ) {
        Ok(m) => m,
        Err(Error::Capacity { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let host = FunctionSpace::new(host_mesh, SpaceKind::P1ZeroTrace)?;
    let host_sys =
        GalerkinSystem::build(host, k, ProblemKind::NeumannJump, data, &opts.quadrature)?;
    let star = solve(&host_sys)?;
    let p = p1_prolongation(&last_sys.space, &host_sys.space)?;
    let up = DVector::from_vec(p.apply(last_sol.coefficients.as_slice()));
    let gap = energy_diff(&host_sys.matrix, &up, &star.coefficients);
    Ok(Some((gap, host_sys.dof_count())))
}

// ---------------------------------------------------------------------------
// Galerkin orthogonality and the quasi-optimality identity
// ---------------------------------------------------------------------------

fn prolongation_between(coarse: &FunctionSpace, fine: &FunctionSpace) -> Result<Prolongation> {
    match (coarse.kind, fine.kind) {
        (SpaceKind::P0Jump, SpaceKind::P0Jump) => p0_prolongation(coarse, fine),
        (SpaceKind::P1ZeroTrace, SpaceKind::P1ZeroTrace) => p1_prolongation(coarse, fine),
        _ => Err(Error::SpaceKind {
            expected: "matching kinds",
            got: "mixed",
        }),
    }
}

/// Maximum normalized Galerkin residual of the fine solution against the
/// prolonged coarse basis:
/// `max_i |a(u_f, P e_i) - <b, P e_i>| / ((|A c| + |b|) |P e_i|)`.
pub fn galerkin_orthogonality_check(
    fine: &Solution,
    coarse_space: &FunctionSpace,
    system_fine: &GalerkinSystem,
) -> Result<f64> {
    let p = prolongation_between(coarse_space, &system_fine.space)?;
    let residual = &system_fine.matrix * &fine.coefficients - &system_fine.rhs;
    let pt_r = p.apply_transpose(residual.as_slice());
    let mut col_norms = vec![0.0f64; p.n_coarse];
    for row in &p.rows {
        for &(c, w) in row {
            col_norms[c] += w * w;
        }
    }
    let scale = (&system_fine.matrix * &fine.coefficients).norm() + system_fine.rhs.norm();
    let mut worst = 0.0f64;
    for i in 0..p.n_coarse {
        let cn = col_norms[i].sqrt();
        if cn > 0.0 {
            worst = worst.max(pt_r[i].norm() / (scale * cn).max(1e-300));
        }
    }
    Ok(worst)
}

/// Both sides of the nested-space quasi-optimality bound with discrete
/// constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeaRecord {
    /// `|u_coarse - u_fine|_a`.
    pub lhs: f64,
    /// `(C_h / c_h) |P u_fine - u_fine|_a` with `P` the a-orthogonal
    /// projection onto the coarse space.
    pub rhs: f64,
    pub holds: bool,
    /// Distance between the projection and the coarse Galerkin solution;
    /// for consistent right-hand sides these coincide.
    pub projection_gap: f64,
}

pub const CEA_SLACK: f64 = 1e-8;

/// Evaluate the quasi-optimality identity for a nested pair of solutions.
pub fn cea_diagnostic(
    coarse: &Solution,
    coarse_space: &FunctionSpace,
    fine: &Solution,
    system_fine: &GalerkinSystem,
    continuity_est: f64,
    coercivity_est: f64,
) -> Result<CeaRecord> {
    let p = prolongation_between(coarse_space, &system_fine.space)?;
    let n_fine = system_fine.dof_count();
    let up = DVector::from_vec(p.apply(coarse.coefficients.as_slice()));
    let lhs = energy_diff(&system_fine.matrix, &up, &fine.coefficients);

    // a-orthogonal projection of the fine solution onto the coarse space:
    // (P^T A P) x = P^T A c_fine.
    let nc = p.n_coarse;
    let mut pap = nalgebra::DMatrix::from_element(nc, nc, Complex64::new(0.0, 0.0));
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(nc);
    for c in 0..nc {
        cols.push(DVector::from_vec(p.column(c, n_fine)));
    }
    let a_cols: Vec<DVector<Complex64>> = cols.iter().map(|c| &system_fine.matrix * c).collect();
    for i in 0..nc {
        for j in 0..nc {
            pap[(i, j)] = cols[i].dot(&a_cols[j]);
        }
    }
    let rhs_vec = DVector::from_vec(
        p.apply_transpose((&system_fine.matrix * &fine.coefficients).as_slice()),
    );
    let x = linalg::solve_dense(&pap, &rhs_vec)?;
    let projected = DVector::from_vec(p.apply(x.as_slice()));
    let best = energy_diff(&system_fine.matrix, &projected, &fine.coefficients);
    let rhs = continuity_est / coercivity_est * best;
    let projection_gap = (&x - &coarse.coefficients).norm();
    Ok(CeaRecord {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + CEA_SLACK),
        projection_gap,
    })
}
