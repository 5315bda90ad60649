//! Prefractal screen geometries: Cantor-dust squares and Sierpinski-family
//! triangles in the plane, together with similarity dimensions and the
//! dimension-threshold nullity prediction.
//!
//! Panels are generated by exact integer recursions on the family's natural
//! lattice (base-`q` for a middle-gap ratio `alpha = p/q`, dyadic for the
//! Sierpinski families) and converted to floating point once, so that
//! level-`j` corners carry no accumulated drift and coincident points of
//! touching panels compare bitwise equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance band used when comparing a Hausdorff dimension against the
/// nullity threshold `n + 2s`; equality within this band is classified as
/// `Indeterminate`.
pub const DIM_EQ_TOL: f64 = 1e-12;

/// Screen family selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Corner squares with scaling ratio `alpha` in (0, 1/2); the removed
    /// middle strip has relative width `1 - 2 alpha`.
    CantorDust { alpha: f64 },
    /// Open screens `F_0 \ F_j`: the holes punched out of the unit triangle.
    SierpinskiComplement,
    /// Closed prefractals of the Sierpinski triangle itself.
    SierpinskiGasket,
}

/// A prefractal screen request: family plus recursion level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PrefractalSpec {
    pub family: Family,
    pub level: u32,
}

impl PrefractalSpec {
    pub fn new(family: Family, level: u32) -> Result<Self> {
        if let Family::CantorDust { alpha } = family {
            if !(alpha > 0.0 && alpha < 0.5) {
                return Err(Error::domain(format!(
                    "Cantor ratio alpha must lie in (0, 1/2), got {alpha}"
                )));
            }
        }
        if let Family::SierpinskiComplement = family {
            if level < 1 {
                return Err(Error::domain("complement screens need level >= 1"));
            }
        }
        Ok(PrefractalSpec { family, level })
    }
}

/// One flat panel of a screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Panel {
    Square { x: f64, y: f64, side: f64 },
    Triangle { v: [[f64; 2]; 3] },
}

impl Panel {
    pub fn area(&self) -> f64 {
        match self {
            Panel::Square { side, .. } => side * side,
            Panel::Triangle { v } => {
                0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
                    - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
                    .abs()
            }
        }
    }

    fn max_corner_norm(&self) -> f64 {
        let corners: Vec<[f64; 2]> = match self {
            Panel::Square { x, y, side } => vec![
                [*x, *y],
                [x + side, *y],
                [*x, y + side],
                [x + side, y + side],
            ],
            Panel::Triangle { v } => v.to_vec(),
        };
        corners
            .iter()
            .map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Exact lattice form of a panel, kept for drift-free meshing.
///
/// Square: corner `(xn/den, yn/den)`, side `sn/den`.
/// Triangle: vertices `(xn/den, yn/den * sqrt(3)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactPanel {
    Square { xn: i64, yn: i64, sn: i64, den: i64 },
    Triangle { v: [(i64, i64); 3], den: i64 },
    /// Fallback for irrational `alpha`: plain floating-point square.
    SquareF { x: f64, y: f64, side: f64 },
}

impl ExactPanel {
    pub fn to_panel(&self) -> Panel {
        match *self {
            ExactPanel::Square { xn, yn, sn, den } => {
                let d = den as f64;
                Panel::Square {
                    x: xn as f64 / d,
                    y: yn as f64 / d,
                    side: sn as f64 / d,
                }
            }
            ExactPanel::Triangle { v, den } => {
                let d = den as f64;
                let s3 = 0.75_f64.sqrt();
                Panel::Triangle {
                    v: [
                        [v[0].0 as f64 / d, v[0].1 as f64 / d * s3],
                        [v[1].0 as f64 / d, v[1].1 as f64 / d * s3],
                        [v[2].0 as f64 / d, v[2].1 as f64 / d * s3],
                    ],
                }
            }
            ExactPanel::SquareF { x, y, side } => Panel::Square { x, y, side },
        }
    }
}

/// A planar screen as a finite union of panels with disjoint interiors.
///
/// `open == true` marks a relatively open screen (Neumann side of the
/// theory); `open == false` a closed prefractal whose interior is the
/// Dirichlet screen.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelSet {
    pub family: Family,
    pub level: u32,
    pub panels: Vec<Panel>,
    pub open: bool,
    #[serde(skip)]
    pub(crate) exact: Vec<ExactPanel>,
}

impl PanelSet {
    fn from_exact(family: Family, level: u32, exact: Vec<ExactPanel>, open: bool) -> Self {
        let panels = exact.iter().map(ExactPanel::to_panel).collect();
        PanelSet {
            family,
            level,
            panels,
            open,
            exact,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.panels.iter().map(Panel::area).sum()
    }

    /// Radius of a disc about the origin containing every panel.
    pub fn containing_radius(&self) -> f64 {
        self.panels
            .iter()
            .map(Panel::max_corner_norm)
            .fold(0.0, f64::max)
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("panel set serializes")
    }
}

/// Recognize `alpha` as a small-denominator fraction `p/q`, enabling the
/// exact lattice path (and alignment of level-(j+1) panels with the level-j
/// base-`q` grid). Returns `None` for effectively irrational ratios.
pub fn rational_ratio(alpha: f64) -> Option<(i64, i64)> {
    for q in 2..=64i64 {
        let p = (alpha * q as f64).round() as i64;
        if p >= 1 && (alpha - p as f64 / q as f64).abs() < 1e-12 {
            return Some((p, q));
        }
    }
    None
}

/// Level-`j` Cantor-dust prefractal: `4^j` squares of side `alpha^j`,
/// keeping the four corner sub-squares of each square at every step.
/// Tagged as a closed set; the Dirichlet screen is its interior.
pub fn cantor_dust_prefractal(alpha: f64, level: i64) -> Result<PanelSet> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::domain(format!(
            "Cantor ratio alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if level < 0 {
        return Err(Error::domain(format!("level must be >= 0, got {level}")));
    }
    let j = level as u32;

    let exact = match rational_ratio(alpha) {
        Some((p, q)) if q.checked_pow(j).is_some() && p.checked_pow(j).is_some() => {
            cantor_exact(p, q, j)
        }
        _ => cantor_float(alpha, j),
    };
    Ok(PanelSet::from_exact(
        Family::CantorDust { alpha },
        j,
        exact,
        false,
    ))
}

fn cantor_exact(p: i64, q: i64, level: u32) -> Vec<ExactPanel> {
    // Offsets scale by q per level; a square (xn, yn, sn) over q^j spawns
    // corner children over q^(j+1) at xn*q and xn*q + sn*(q - p).
    let mut squares = vec![(0i64, 0i64, 1i64)];
    let mut den = 1i64;
    for _ in 0..level {
        let mut next = Vec::with_capacity(squares.len() * 4);
        for &(xn, yn, sn) in &squares {
            let shift = sn * (q - p);
            let (x0, x1) = (xn * q, xn * q + shift);
            let (y0, y1) = (yn * q, yn * q + shift);
            let sc = sn * p;
            next.push((x0, y0, sc));
            next.push((x1, y0, sc));
            next.push((x0, y1, sc));
            next.push((x1, y1, sc));
        }
        squares = next;
        den *= q;
    }
    squares
        .into_iter()
        .map(|(xn, yn, sn)| ExactPanel::Square { xn, yn, sn, den })
        .collect()
}

fn cantor_float(alpha: f64, level: u32) -> Vec<ExactPanel> {
    let mut squares = vec![(0.0f64, 0.0f64, 1.0f64)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(squares.len() * 4);
        for &(x, y, s) in &squares {
            let shift = s * (1.0 - alpha);
            let sc = s * alpha;
            next.push((x, y, sc));
            next.push((x + shift, y, sc));
            next.push((x, y + shift, sc));
            next.push((x + shift, y + shift, sc));
        }
        squares = next;
    }
    squares
        .into_iter()
        .map(|(x, y, side)| ExactPanel::SquareF { x, y, side })
        .collect()
}

/// Unit equilateral base triangle on the dyadic lattice: vertices
/// (0,0), (1,0), (1/2, sqrt(3)/2), stored over denominator 2 with the
/// y-coordinate in units of sqrt(3)/2.
fn base_triangle() -> ([(i64, i64); 3], i64) {
    ([(0, 0), (2, 0), (1, 2)], 2)
}

/// Level-`j` Sierpinski gasket prefractal: `3^j` closed upright triangles at
/// scale `2^-j`, each a corner-similitude copy of the base triangle.
pub fn sierpinski_prefractal(level: i64) -> Result<PanelSet> {
    if level < 0 {
        return Err(Error::domain(format!("level must be >= 0, got {level}")));
    }
    let j = level as u32;
    let (base, mut den) = base_triangle();
    let mut tris = vec![base];
    for _ in 0..j {
        let mut next = Vec::with_capacity(tris.len() * 3);
        for t in &tris {
            next.extend_from_slice(&corner_children(t));
        }
        tris = next;
        den *= 2;
    }
    let exact = tris
        .into_iter()
        .map(|v| ExactPanel::Triangle { v, den })
        .collect();
    Ok(PanelSet::from_exact(Family::SierpinskiGasket, j, exact, false))
}

fn corner_children(t: &[(i64, i64); 3]) -> [[(i64, i64); 3]; 3] {
    let [a, b, c] = *t;
    let d = |u: (i64, i64)| (2 * u.0, 2 * u.1);
    let s = |u: (i64, i64), w: (i64, i64)| (u.0 + w.0, u.1 + w.1);
    [
        [d(a), s(a, b), s(a, c)],
        [s(b, a), d(b), s(b, c)],
        [s(c, a), s(c, b), d(c)],
    ]
}

/// Middle (inverted) triangle of an upright triangle, doubled coordinates.
fn middle_child(t: &[(i64, i64); 3]) -> [(i64, i64); 3] {
    let [a, b, c] = *t;
    [
        (a.0 + b.0, a.1 + b.1),
        (b.0 + c.0, b.1 + c.1),
        (c.0 + a.0, c.1 + a.1),
    ]
}

/// Level-`j` Sierpinski complement screen `F_0 \ F_j`: the union of all
/// `(3^j - 1)/2` open holes removed through level `j`. Panel closures meet
/// other panels at finitely many points only.
pub fn sierpinski_complement_screen(level: i64) -> Result<PanelSet> {
    if level < 1 {
        return Err(Error::domain(format!("level must be >= 1, got {level}")));
    }
    let j = level as u32;
    let (base, base_den) = base_triangle();
    let mut upright = vec![base];
    let mut den = base_den;
    let mut holes: Vec<ExactPanel> = Vec::new();
    for _ in 0..j {
        den *= 2;
        let mut next = Vec::with_capacity(upright.len() * 3);
        for t in &upright {
            holes.push(ExactPanel::Triangle {
                v: middle_child(t),
                den,
            });
            next.extend_from_slice(&corner_children(t));
        }
        upright = next;
        // Scale earlier holes to the new common denominator.
        for h in &mut holes {
            if let ExactPanel::Triangle { v, den: hd } = h {
                if *hd < den {
                    for p in v.iter_mut() {
                        *p = (2 * p.0, 2 * p.1);
                    }
                    *hd = den;
                }
            }
        }
    }
    Ok(PanelSet::from_exact(
        Family::SierpinskiComplement,
        j,
        holes,
        true,
    ))
}

/// Generate the screen described by a [`PrefractalSpec`].
pub fn generate(spec: &PrefractalSpec) -> Result<PanelSet> {
    match spec.family {
        Family::CantorDust { alpha } => cantor_dust_prefractal(alpha, spec.level as i64),
        Family::SierpinskiGasket => sierpinski_prefractal(spec.level as i64),
        Family::SierpinskiComplement => sierpinski_complement_screen(spec.level as i64),
    }
}

/// Nullity classification of a set against the `H^s` threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nullity {
    Null,
    NotNull,
    Indeterminate,
}

/// Similarity dimension of a family together with the `s = -1/2` prediction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DimensionReport {
    pub hausdorff_dim: f64,
    /// `(dim - n)/2` with ambient dimension `n = 2`.
    pub threshold_s: f64,
    pub prediction: Nullity,
}

/// Similarity dimension of the limit fractal: `2 log 2 / log(1/alpha)` for
/// Cantor dust, `log 3 / log 2` for both Sierpinski families.
pub fn similarity_dimension(spec: &PrefractalSpec) -> Result<DimensionReport> {
    let dim = match spec.family {
        Family::CantorDust { alpha } => {
            if !(alpha > 0.0 && alpha < 0.5) {
                return Err(Error::domain(format!(
                    "Cantor ratio alpha must lie in (0, 1/2), got {alpha}"
                )));
            }
            2.0 * std::f64::consts::LN_2 / (1.0 / alpha).ln()
        }
        Family::SierpinskiComplement | Family::SierpinskiGasket => 3f64.ln() / std::f64::consts::LN_2,
    };
    Ok(DimensionReport {
        hausdorff_dim: dim,
        threshold_s: (dim - 2.0) / 2.0,
        prediction: nullity_prediction(dim, -0.5)?,
    })
}

/// Dimension-threshold dichotomy: a set of Hausdorff dimension `dim` in the
/// plane is predicted `s`-null when `dim < n + 2s` and not `s`-null when
/// `dim > n + 2s` (`n = 2`); at equality both outcomes occur, so the
/// prediction is `Indeterminate` (equality is tested within [`DIM_EQ_TOL`]).
pub fn nullity_prediction(dim: f64, s: f64) -> Result<Nullity> {
    if !(-1.0..=0.0).contains(&s) {
        return Err(Error::domain(format!(
            "nullity predicate supported for -1 <= s <= 0, got {s}"
        )));
    }
    if !(0.0..=2.0).contains(&dim) {
        return Err(Error::domain(format!(
            "Hausdorff dimension must lie in [0, 2], got {dim}"
        )));
    }
    let threshold = 2.0 + 2.0 * s;
    Ok(if (dim - threshold).abs() <= DIM_EQ_TOL {
        Nullity::Indeterminate
    } else if dim < threshold {
        Nullity::Null
    } else {
        Nullity::NotNull
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_base_case_is_unit_square() {
        let s = cantor_dust_prefractal(1.0 / 3.0, 0).unwrap();
        assert_eq!(s.panels.len(), 1);
        assert_eq!(
            s.panels[0],
            Panel::Square {
                x: 0.0,
                y: 0.0,
                side: 1.0
            }
        );
        assert!(!s.open);
    }

    #[test]
    fn cantor_level_one_corners() {
        let s = cantor_dust_prefractal(1.0 / 3.0, 1).unwrap();
        assert_eq!(s.panels.len(), 4);
        let mut corners: Vec<(f64, f64)> = s
            .panels
            .iter()
            .map(|p| match p {
                Panel::Square { x, y, side } => {
                    assert!((side - 1.0 / 3.0).abs() < 1e-15);
                    (*x, *y)
                }
                _ => panic!("expected squares"),
            })
            .collect();
        corners.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let e = 2.0 / 3.0;
        assert_eq!(corners, vec![(0.0, 0.0), (0.0, e), (e, 0.0), (e, e)]);
    }

    #[test]
    fn cantor_level_three_at_fifth() {
        let s = cantor_dust_prefractal(0.2, 3).unwrap();
        assert_eq!(s.panels.len(), 64);
        for p in &s.panels {
            match p {
                Panel::Square { side, .. } => assert!((side - 0.008).abs() < 1e-15),
                _ => panic!(),
            }
        }
    }

    #[test]
    fn cantor_area_law() {
        for &(alpha, j) in &[(1.0 / 3.0, 4), (0.2, 3), (0.47, 5)] {
            let s = cantor_dust_prefractal(alpha, j).unwrap();
            let expect = (4.0 * alpha * alpha).powi(j as i32);
            assert!(
                (s.total_area() - expect).abs() < 1e-12,
                "area {} vs {}",
                s.total_area(),
                expect
            );
        }
    }

    #[test]
    fn cantor_rejects_bad_ratio() {
        assert!(cantor_dust_prefractal(0.6, 1).is_err());
        assert!(cantor_dust_prefractal(0.0, 1).is_err());
        assert!(cantor_dust_prefractal(0.5, 1).is_err());
        assert!(cantor_dust_prefractal(0.3, -1).is_err());
    }

    #[test]
    fn cantor_nested_in_parent() {
        let coarse = cantor_dust_prefractal(1.0 / 3.0, 2).unwrap();
        let fine = cantor_dust_prefractal(1.0 / 3.0, 3).unwrap();
        for f in &fine.panels {
            let Panel::Square { x, y, side } = f else { panic!() };
            let inside = coarse.panels.iter().any(|c| {
                let Panel::Square { x: cx, y: cy, side: cs } = c else { panic!() };
                x + 1e-12 >= *cx
                    && y + 1e-12 >= *cy
                    && x + side <= cx + cs + 1e-12
                    && y + side <= cy + cs + 1e-12
            });
            assert!(inside);
        }
    }

    #[test]
    fn gasket_counts_and_scale() {
        assert_eq!(sierpinski_prefractal(0).unwrap().panels.len(), 1);
        let s1 = sierpinski_prefractal(1).unwrap();
        assert_eq!(s1.panels.len(), 3);
        let child_area = 0.75f64.sqrt() / 8.0;
        for p in &s1.panels {
            assert!((p.area() - child_area).abs() < 1e-15);
        }
        assert_eq!(sierpinski_prefractal(4).unwrap().panels.len(), 81);
    }

    #[test]
    fn complement_counts() {
        assert_eq!(sierpinski_complement_screen(1).unwrap().panels.len(), 1);
        assert_eq!(sierpinski_complement_screen(2).unwrap().panels.len(), 4);
        assert_eq!(sierpinski_complement_screen(3).unwrap().panels.len(), 13);
        assert!(sierpinski_complement_screen(0).is_err());
        let s = sierpinski_complement_screen(2).unwrap();
        assert!(s.open);
    }

    #[test]
    fn complement_level_one_is_middle_triangle() {
        let s = sierpinski_complement_screen(1).unwrap();
        let Panel::Triangle { v } = &s.panels[0] else { panic!() };
        let s3 = 0.75f64.sqrt();
        let mut got: Vec<[f64; 2]> = v.to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = vec![[0.5, 0.0], [0.75, 0.5 * s3], [0.25, 0.5 * s3]];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g[0] - w[0]).abs() < 1e-15 && (g[1] - w[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn complement_panels_persist_across_levels() {
        let a = sierpinski_complement_screen(2).unwrap();
        let b = sierpinski_complement_screen(3).unwrap();
        for p in &a.panels {
            assert!(b.panels.contains(p), "panel of level 2 missing at level 3");
        }
    }

    #[test]
    fn complement_area_matches_gasket_deficit() {
        // area(F_0) - area(F_j) = area of all holes through level j.
        let f0 = 0.75f64.sqrt() / 2.0;
        let j = 4;
        let holes = sierpinski_complement_screen(j).unwrap().total_area();
        let kept = sierpinski_prefractal(j).unwrap().total_area();
        assert!((holes + kept - f0).abs() < 1e-12);
    }

    #[test]
    fn dimension_values() {
        let d = similarity_dimension(
            &PrefractalSpec::new(Family::CantorDust { alpha: 1.0 / 3.0 }, 1).unwrap(),
        )
        .unwrap();
        assert!((d.hausdorff_dim - 1.2618595071429148).abs() < 1e-10);
        assert_eq!(d.prediction, Nullity::NotNull);
        assert!((d.threshold_s - (d.hausdorff_dim - 2.0) / 2.0).abs() < 1e-15);

        let d = similarity_dimension(
            &PrefractalSpec::new(Family::CantorDust { alpha: 0.25 }, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(d.hausdorff_dim, 1.0);
        assert_eq!(d.prediction, Nullity::Indeterminate);

        let d = similarity_dimension(
            &PrefractalSpec::new(Family::SierpinskiGasket, 1).unwrap(),
        )
        .unwrap();
        assert!((d.hausdorff_dim - 1.584962500721156).abs() < 1e-10);
        assert_eq!(d.prediction, Nullity::NotNull);
    }

    #[test]
    fn dimension_monotone_and_continuous_in_alpha() {
        let mut prev = 0.0;
        let mut alpha = 0.01;
        while alpha < 0.5 {
            let d = similarity_dimension(
                &PrefractalSpec::new(Family::CantorDust { alpha }, 0).unwrap(),
            )
            .unwrap()
            .hausdorff_dim;
            assert!(d > prev);
            // Continuity: small step, small change.
            let d2 = similarity_dimension(
                &PrefractalSpec::new(Family::CantorDust { alpha: alpha + 1e-6 }, 0).unwrap(),
            )
            .unwrap()
            .hausdorff_dim;
            assert!((d2 - d).abs() < 1e-4);
            prev = d;
            alpha += 0.01;
        }
    }

    #[test]
    fn nullity_threshold_cases() {
        assert_eq!(nullity_prediction(0.8612, -0.5).unwrap(), Nullity::Null);
        assert_eq!(nullity_prediction(1.58496, -0.5).unwrap(), Nullity::NotNull);
        assert_eq!(
            nullity_prediction(1.0, -0.5).unwrap(),
            Nullity::Indeterminate
        );
        assert!(nullity_prediction(1.0, 0.2).is_err());
        assert!(nullity_prediction(1.0, -1.2).is_err());
        assert!(nullity_prediction(2.4, -0.5).is_err());
    }

    #[test]
    fn panel_set_json_schema() {
        let s = cantor_dust_prefractal(1.0 / 3.0, 1).unwrap();
        let text = s.to_json();
        // Emission order follows the documented schema.
        let pos = |key: &str| text.find(&format!("\"{key}\"")).unwrap();
        assert!(pos("family") < pos("level"));
        assert!(pos("level") < pos("panels"));
        assert!(pos("panels") < pos("open"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 4);
        assert_eq!(v["panels"][0]["type"], "square");
        assert_eq!(v["open"], false);
        let t = sierpinski_complement_screen(1).unwrap().to_json();
        let v: serde_json::Value = serde_json::from_str(&t).unwrap();
        assert_eq!(v["panels"][0]["type"], "triangle");
        assert!(v["panels"][0]["v"].as_array().unwrap().len() == 3);
    }

    #[test]
    fn containing_radius_known() {
        let s = cantor_dust_prefractal(0.2, 2).unwrap();
        assert!((s.containing_radius() - 2f64.sqrt()).abs() < 1e-15);
    }
}
