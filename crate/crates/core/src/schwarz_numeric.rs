//! A smooth map `F : ℝ³ → ℝ²` that agrees with its twist by the half turn
//! pointwise, with the twisting element changing sign across every cylinder
//! `r = 1/(2n)` and accumulating at the axis.
//!
//! The half turn acts by `(x, y, z) ↦ (−x, −y, z)` on the source and by
//! `(a, z) ↦ (−a, z)` on the target.

use std::collections::VecDeque;
use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchwarzError {
    #[error("g is only defined for x ≥ 0 (got {0})")]
    NegativeInput(f64),
    #[error("no {kind} witness within {radius} of ({}, {}, {})", .target[0], .target[1], .target[2])]
    WitnessNotFound {
        target: [f64; 3],
        radius: f64,
        kind: WitnessKind,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Bump on `(0, 2)`, flat at both ends.
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 2.0 {
        0.0
    } else {
        (-1.0 / (t * (2.0 - t))).exp()
    }
}

/// Period-4 profile: `+bump` on `(0,2)`, `−bump` on `(2,4)`, zero at even integers.
pub fn f_eval(x: f64) -> f64 {
    let t = x.rem_euclid(4.0);
    if t < 2.0 {
        bump(t)
    } else {
        -bump(t - 2.0)
    }
}

/// `g(x) = e^{−n} f(1/x)` with `n` the least even integer `≥ 1/x`; `g(0) = 0`.
pub fn g_eval(x: f64) -> Result<f64, SchwarzError> {
    if x < 0.0 {
        return Err(SchwarzError::NegativeInput(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / x;
    let n = 2.0 * (inv / 2.0).ceil();
    Ok((-n).exp() * f_eval(inv))
}

fn g_nonneg(r: f64) -> f64 {
    g_eval(r).expect("radius is non-negative")
}

pub fn map_eval(x: f64, y: f64, z: f64) -> [f64; 2] {
    let r = x.hypot(y);
    if r == 0.0 {
        return [0.0, z];
    }
    let theta = y.atan2(x);
    let g = g_nonneg(r);
    if g > 0.0 {
        [g * theta.sin(), z]
    } else {
        [g * (2.0 * theta).sin(), z]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzConfig {
    pub grid_step: f64,
    pub n_max: usize,
    /// Tolerance for exact identities.
    pub tol: f64,
    /// Relative gap required of witness inequalities.
    pub witness_tol: f64,
    /// Ball radii tried around each target, largest first.
    pub radii: Vec<f64>,
}

impl Default for SchwarzConfig {
    fn default() -> Self {
        SchwarzConfig {
            grid_step: 0.01,
            n_max: 5,
            tol: 1e-9,
            witness_tol: 1e-3,
            radii: vec![0.5, 0.2, 0.1, 0.05, 0.02],
        }
    }
}

impl SchwarzConfig {
    pub fn validate(&self) -> Result<(), SchwarzError> {
        if [self.grid_step, self.tol, self.witness_tol].iter().any(|v| v.is_nan() || *v <= 0.0) || self.n_max == 0 {
            return Err(SchwarzError::InvalidConfig(
                "step, tolerances and n_max must be positive".into(),
            ));
        }
        if self.radii.iter().any(|&r| r.is_nan() || r <= 0.0) {
            return Err(SchwarzError::InvalidConfig("radii must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    /// `F(v) = F(−v) ≠ −F(−v)`.
    Type1,
    /// `F(w) = −F(−w) ≠ F(−w)`.
    Type2,
}

impl std::fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WitnessKind::Type1 => "type1",
            WitnessKind::Type2 => "type2",
        })
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-300 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative margin by which `v` is a witness of `kind`, or `None`.
pub fn witness_margin(v: [f64; 3], kind: WitnessKind, tol: f64) -> Option<f64> {
    let fv = map_eval(v[0], v[1], v[2]);
    let fm = map_eval(-v[0], -v[1], v[2]);
    let (same, twisted) = (fm[0], -fm[0]);
    let (eq, ne) = match kind {
        WitnessKind::Type1 => (same, twisted),
        WitnessKind::Type2 => (twisted, same),
    };
    let holds = (fv[0] - eq).abs() <= tol * fv[0].abs().max(1e-300) && fv[1] == fm[1];
    let margin = rel_gap(fv[0], ne);
    (holds && margin > tol).then_some(margin)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub stratum: String,
    pub target: [f64; 3],
    pub radius: f64,
    pub kind: WitnessKind,
    pub point: [f64; 3],
    pub margin: f64,
}

const RADIAL_STEPS: usize = 400;
const DIRECTIONS: usize = 16;

/// First witness of `kind` strictly inside the ball, scanning outward along
/// sixteen horizontal directions.
pub fn find_witness(
    target: [f64; 3],
    radius: f64,
    kind: WitnessKind,
    witness_tol: f64,
) -> Result<([f64; 3], f64), SchwarzError> {
    for k in 1..RADIAL_STEPS {
        let s = radius * k as f64 / RADIAL_STEPS as f64;
        for j in 0..DIRECTIONS {
            let a = (j as f64 + 0.5) * 2.0 * PI / DIRECTIONS as f64;
            let v = [target[0] + s * a.cos(), target[1] + s * a.sin(), target[2]];
            if let Some(m) = witness_margin(v, kind, witness_tol) {
                return Ok((v, m));
            }
        }
    }
    Err(SchwarzError::WitnessNotFound { target, radius, kind })
}

/// Both witness kinds near `target` at every radius of the schedule.
pub fn witnesses_at(
    stratum: &str,
    target: [f64; 3],
    cfg: &SchwarzConfig,
) -> Result<Vec<Witness>, SchwarzError> {
    let mut out = Vec::new();
    for &radius in &cfg.radii {
        for kind in [WitnessKind::Type1, WitnessKind::Type2] {
            let (point, margin) = find_witness(target, radius, kind, cfg.witness_tol)?;
            out.push(Witness {
                stratum: stratum.to_string(),
                target,
                radius,
                kind,
                point,
                margin,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub p: [f64; 3],
    pub image: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumReport {
    pub stratum: String,
    pub samples: Vec<Sample>,
    /// The closure of the sampled image looks negligible in the plane.
    pub obstruction: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub strata: Vec<StratumReport>,
    pub witnesses: Vec<Witness>,
    /// `F(v) ∈ {F(−v), −F(−v)}` at every grid point checked.
    pub pointwise_agreement: bool,
    pub grid_points: usize,
}

impl SampleReport {
    /// No stratum other than controls shows an obstruction.
    pub fn diffuse(&self) -> bool {
        self.strata
            .iter()
            .filter(|s| !s.stratum.starts_with("control"))
            .all(|s| !s.obstruction)
    }
}

const RASTER: i64 = 50;

/// Whether removing the rasterized image splits a disk centred on it.
///
/// The disk has radius `0.4 ×` the image extent; a closed set with empty
/// interior that separates a disk is not negligible. Images of extent zero
/// never separate.
pub fn separates_disk(image: &[[f64; 2]]) -> bool {
    if image.is_empty() {
        return false;
    }
    let (mut lo, mut hi) = (image[0], image[0]);
    for p in image {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let radius = if extent > 0.0 { 0.4 * extent } else { 1.0 };
    let h = radius / RASTER as f64;
    let side = (2 * RASTER + 1) as usize;
    let cell = |p: [f64; 2]| -> Option<(usize, usize)> {
        let i = ((p[0] - centre[0]) / h).round() as i64 + RASTER;
        let j = ((p[1] - centre[1]) / h).round() as i64 + RASTER;
        ((0..side as i64).contains(&i) && (0..side as i64).contains(&j)).then_some((i as usize, j as usize))
    };
    let mut blocked = vec![false; side * side];
    for &p in image {
        if let Some((i, j)) = cell(p) {
            blocked[i * side + j] = true;
        }
    }
    let inside = |i: usize, j: usize| {
        let (di, dj) = (i as i64 - RASTER, j as i64 - RASTER);
        di * di + dj * dj <= RASTER * RASTER
    };
    let mut seen = vec![false; side * side];
    let mut parts = 0;
    for start in 0..side * side {
        let (i, j) = (start / side, start % side);
        if seen[start] || blocked[start] || !inside(i, j) {
            continue;
        }
        parts += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([(i, j)]);
        while let Some((a, b)) = queue.pop_front() {
            let nbrs = [
                (a.wrapping_sub(1), b),
                (a + 1, b),
                (a, b.wrapping_sub(1)),
                (a, b + 1),
            ];
            for (c, d) in nbrs {
                if c < side && d < side && inside(c, d) && !blocked[c * side + d] && !seen[c * side + d] {
                    seen[c * side + d] = true;
                    queue.push_back((c, d));
                }
            }
        }
    }
    parts >= 2
}

const PATCH_SAMPLES: usize = 200;

fn stratum(name: String, points: Vec<[f64; 3]>, map: impl Fn([f64; 3]) -> [f64; 2]) -> StratumReport {
    let samples: Vec<Sample> = points.into_iter().map(|p| Sample { p, image: map(p) }).collect();
    let image: Vec<[f64; 2]> = samples.iter().map(|s| s.image).collect();
    StratumReport {
        stratum: name,
        obstruction: !separates_disk(&image),
        samples,
    }
}

fn z_patch(x: f64, y: f64) -> Vec<[f64; 3]> {
    (0..=PATCH_SAMPLES)
        .map(|k| [x, y, -0.1 + 0.2 * k as f64 / PATCH_SAMPLES as f64])
        .collect()
}

fn cylinder_patch(r: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for a in 0..5 {
        let theta = 0.2 + 0.05 * a as f64;
        for p in z_patch(r * theta.cos(), r * theta.sin()) {
            out.push(p);
        }
    }
    out
}

/// Samples a patch of each stratum (axis, cylinders, Ξ lines, and a
/// collapsing control) and applies the disk-separation test to its image.
pub fn diffuse_sample_report(cfg: &SchwarzConfig) -> Result<SampleReport, SchwarzError> {
    cfg.validate()?;
    let eval = |p: [f64; 3]| map_eval(p[0], p[1], p[2]);
    let mut strata = vec![stratum("axis".into(), z_patch(0.0, 0.0), eval)];
    for n in 1..=cfg.n_max {
        strata.push(stratum(format!("C{n}"), cylinder_patch(1.0 / (2.0 * n as f64)), eval));
    }
    for k in (1..2 * cfg.n_max).step_by(2) {
        let r = 1.0 / k as f64;
        let a = if g_nonneg(r) > 0.0 { PI / 2.0 } else { PI / 4.0 };
        strata.push(stratum(format!("Xi{k}"), z_patch(r * a.cos(), r * a.sin()), eval));
    }
    let square: Vec<[f64; 3]> = (0..20)
        .flat_map(|i| (0..20).map(move |j| [0.3 + 0.01 * i as f64, 0.01 * j as f64, 0.0]))
        .collect();
    strata.push(stratum("control-collapse".into(), square, |_| [0.25, 0.5]));
    Ok(SampleReport {
        strata,
        witnesses: Vec::new(),
        pointwise_agreement: true,
        grid_points: 0,
    })
}

/// Witnesses around the axis and one point of each cylinder, plus the
/// pointwise agreement check on the grid over `r ≤ 1`, `|z| ≤ 1`.
pub fn pathology_witness_search(cfg: &SchwarzConfig) -> Result<SampleReport, SchwarzError> {
    cfg.validate()?;
    let mut witnesses = witnesses_at("axis", [0.0, 0.0, 0.0], cfg)?;
    for n in 1..=cfg.n_max {
        let r = 1.0 / (2.0 * n as f64);
        let a = PI / 3.0;
        witnesses.extend(witnesses_at(&format!("C{n}"), [r * a.cos(), r * a.sin(), 0.0], cfg)?);
    }
    let (pointwise_agreement, grid_points) = symmetry_scan(cfg.grid_step, cfg.tol, |_, _| {});
    Ok(SampleReport {
        strata: Vec::new(),
        witnesses,
        pointwise_agreement,
        grid_points,
    })
}

/// Checks `g(r) ≤ 0 ⇒ F(−v) = F(v)` and `g(r) > 0 ⇒ F(−v) = −F(v)` at grid
/// points with `r ≤ 1`, `|z| ≤ 1`; `visit` sees each point and whether it
/// passed. Returns the overall verdict and the number of points.
pub fn symmetry_scan(step: f64, tol: f64, mut visit: impl FnMut([f64; 3], bool)) -> (bool, usize) {
    let m = (1.0 / step).round() as i64;
    let mut all = true;
    let mut count = 0;
    for i in -m..=m {
        let x = i as f64 * step;
        for j in -m..=m {
            let y = j as f64 * step;
            if x.hypot(y) > 1.0 + 1e-12 {
                continue;
            }
            let g = g_nonneg(x.hypot(y));
            for k in -m..=m {
                let z = k as f64 * step;
                let fv = map_eval(x, y, z);
                let fm = map_eval(-x, -y, z);
                let expect = if g > 0.0 { -fv[0] } else { fv[0] };
                let ok = (fm[0] - expect).abs() <= tol && fm[1] == fv[1];
                all &= ok;
                count += 1;
                visit([x, y, z], ok);
            }
        }
    }
    (all, count)
}

/// Group element relating `F(−v)` to `F(v)` on each radial band between
/// consecutive cylinders inside `(lo, hi)`: `false` for the identity,
/// `true` for the twist. Bands are listed outward.
pub fn band_elements(lo: f64, hi: f64, step: f64) -> Vec<((f64, f64), Vec<bool>)> {
    let mut cuts: Vec<f64> = (1..)
        .map(|n| 1.0 / (2.0 * n as f64))
        .take_while(|&c| c > lo)
        .filter(|&c| c < hi)
        .collect();
    cuts.reverse();
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);
    edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let k = ((b - a) / step).floor() as usize;
            let elems = (1..k)
                .map(|i| g_nonneg(a + i as f64 * step) > 0.0)
                .collect();
            ((a, b), elems)
        })
        .collect()
}

pub fn report_csv(report: &SampleReport) -> String {
    let mut out = String::from("stratum,x,y,z,Fx,Fz,witness_type\n");
    for s in &report.strata {
        for p in &s.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},\n",
                s.stratum, p.p[0], p.p[1], p.p[2], p.image[0], p.image[1]
            ));
        }
    }
    for w in &report.witnesses {
        let img = map_eval(w.point[0], w.point[1], w.point[2]);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            w.stratum, w.point[0], w.point[1], w.point[2], img[0], img[1], w.kind
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        assert_eq!(f_eval(2.0), 0.0);
        assert!((f_eval(1.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((f_eval(3.0) + (-1.0f64).exp()).abs() < 1e-12);
        assert!((f_eval(-3.0) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_eval(0.0).unwrap(), 0.0);
        let expect = -(-4.0f64).exp() * (-4.0f64 / 3.0).exp();
        assert!((g_eval(0.4).unwrap() - expect).abs() < 1e-15);
        assert!((g_eval(0.4).unwrap() + 0.004828).abs() < 1e-6);
        for n in 1..50 {
            assert_eq!(g_eval(1.0 / (2.0 * n as f64)).unwrap(), 0.0);
        }
        assert!(matches!(g_eval(-0.1), Err(SchwarzError::NegativeInput(_))));
    }

    #[test]
    fn map_values() {
        assert_eq!(map_eval(0.0, 0.0, 0.7), [0.0, 0.7]);
        let v = map_eval(0.0, 1.0, 0.0);
        assert!((v[0] - (-3.0f64).exp()).abs() < 1e-15);
        assert!((v[0] - 0.049787).abs() < 1e-6);
        for n in 1..6 {
            let r = 1.0 / (2.0 * n as f64);
            let v = map_eval(r * 0.3f64.cos(), r * 0.3f64.sin(), 0.25);
            assert!(v[0].abs() < 1e-15 && v[1] == 0.25);
        }
    }

    #[test]
    fn literal_witness_points() {
        let c = (PI / 4.0).cos();
        let s = (PI / 4.0).sin();
        assert!(witness_margin([0.3 * c, 0.3 * s, 0.0], WitnessKind::Type1, 1e-3).is_some());
        assert!(witness_margin([0.6 * c, 0.6 * s, 0.0], WitnessKind::Type2, 1e-3).is_some());
    }

    #[test]
    fn witnesses_near_origin_and_cylinder() {
        let cfg = SchwarzConfig::default();
        let ws = witnesses_at("axis", [0.0, 0.0, 0.0], &cfg).unwrap();
        assert_eq!(ws.len(), 10);
        for w in &ws {
            let d = w.point[0].hypot(w.point[1]);
            assert!(d < w.radius && w.margin > cfg.witness_tol);
        }
        let a = PI / 3.0;
        let target = [0.5 * a.cos(), 0.5 * a.sin(), 0.0];
        let (v, _) = find_witness(target, 0.05, WitnessKind::Type1, 1e-3).unwrap();
        let (w, _) = find_witness(target, 0.05, WitnessKind::Type2, 1e-3).unwrap();
        assert!(v[0].hypot(v[1]) < 0.5 && w[0].hypot(w[1]) > 0.5);
    }

    #[test]
    fn fixed_sign_band_has_no_twist_witness() {
        let err = find_witness([0.3, 0.0, 0.0], 0.02, WitnessKind::Type2, 1e-3).unwrap_err();
        assert!(matches!(err, SchwarzError::WitnessNotFound { kind: WitnessKind::Type2, .. }));
    }

    #[test]
    fn separation_criterion() {
        let seg: Vec<[f64; 2]> = (0..=200).map(|k| [0.0, -0.1 + 0.001 * k as f64]).collect();
        assert!(separates_disk(&seg));
        assert!(!separates_disk(&[[0.2, 0.3]; 50]));
    }

    #[test]
    fn strata_report() {
        let r = diffuse_sample_report(&SchwarzConfig::default()).unwrap();
        assert!(r.diffuse());
        let control = r.strata.iter().find(|s| s.stratum == "control-collapse").unwrap();
        assert!(control.obstruction);
        assert_eq!(r.strata.len(), 1 + 5 + 5 + 1);
    }

    #[test]
    fn bands_alternate() {
        let bands = band_elements(0.1, 0.7, 0.001);
        assert_eq!(bands.len(), 5);
        let signs: Vec<bool> = bands
            .iter()
            .map(|(_, e)| {
                assert!(e.iter().all(|&x| x == e[0]));
                e[0]
            })
            .collect();
        assert_eq!(signs, vec![true, false, true, false, true]);
    }
}
