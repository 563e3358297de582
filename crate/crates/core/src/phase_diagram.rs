//! Global minima of `G`, their type and strength, the phase they imply, and
//! scans of the `(β, h)` plane.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field_models::{FieldModel, FreeEnergy};
use crate::numerics::{linspace, roots};
use crate::output::{fmt_f64, fmt_list};
use crate::rate_function::{g_derivative, g_value, RateFunction};

/// Knobs of the stationary-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Points of the uniform grid on `[-1, 1]` scanned for sign changes of `G'`.
    pub grid_points: usize,
    /// Location tolerance of the Newton/bisection refinement.
    pub x_tol: f64,
    /// Minima tie when `|G(m) - G_min| <= tie_rel * max(1, |G_min|)`.
    pub tie_rel: f64,
    /// `|G^(2j)(m)| <= zero_rel * max(1, β^(2j))` counts as zero.
    pub zero_rel: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { grid_points: 2001, x_tol: 1e-14, tie_rel: 1e-9, zero_rel: 1e-6 }
    }
}

impl SearchOptions {
    fn tie_tol(&self, g_min: f64) -> f64 {
        self.tie_rel * g_min.abs().max(1.0)
    }

    fn zero_threshold(&self, beta: f64, order: usize) -> f64 {
        self.zero_rel * beta.powi(order as i32).max(1.0)
    }
}

/// Derivatives below this (times `max(1, β^j)`) are treated as exactly zero
/// when deciding on which side of a grid point `G'` changes sign.
const SIGN_FLOOR: f64 = 1e-13;
/// Halvings tried when looking for a root hidden between a grid zero and its neighbour.
const MAX_HALVINGS: usize = 60;
const REFINE_MAX_ITER: usize = 300;
/// Minimizers closer than this to 0 count as the origin for `critical_beta`.
const ORIGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Inflection,
}

/// A zero of `G'` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub x: f64,
    pub kind: StationaryKind,
    pub g: f64,
}

/// A global minimum `m` of `G` with `G(x) = G(m) + λ (x-m)^{2k}/(2k)! + ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumReport {
    pub location: f64,
    /// The type `k` (1, 2 or 3).
    pub order: u32,
    /// The strength `λ = G^(2k)(m) > 0`.
    pub strength: f64,
    /// `G(m)`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Paramagnetic,
    Ferromagnetic,
    FirstOrder,
    SecondOrder,
    Tricritical,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Paramagnetic => "paramagnetic",
            PhaseLabel::Ferromagnetic => "ferromagnetic",
            PhaseLabel::FirstOrder => "first_order",
            PhaseLabel::SecondOrder => "second_order",
            PhaseLabel::Tricritical => "tricritical",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of `G'` just right and just left of a zero of `G'` at `x`, read off
/// the first derivative of order >= 2 that is not negligible.
fn local_signs(fe: &FreeEnergy, x: f64) -> Option<(i8, i8)> {
    let beta = fe.beta();
    for order in 2..=6 {
        let d = g_derivative(fe, order, x);
        if d.abs() > SIGN_FLOOR * beta.powi(order as i32).max(1.0) {
            let right = sign(d);
            let left = if order % 2 == 0 { -right } else { right };
            return Some((right, left));
        }
    }
    None
}

fn kind_from_signs(left: i8, right: i8) -> StationaryKind {
    match (left, right) {
        (-1, 1) => StationaryKind::Minimum,
        (1, -1) => StationaryKind::Maximum,
        _ => StationaryKind::Inflection,
    }
}

fn refine(fe: &FreeEnergy, a: f64, b: f64, opts: &SearchOptions) -> Result<f64> {
    roots::newton_bisect(|x| (g_derivative(fe, 1, x), g_derivative(fe, 2, x)), a, b, opts.x_tol, REFINE_MAX_ITER)
}

/// Refines a root in `(a, b)` where `G'` goes from `sign_a` to `sign_b`, and
/// checks the curvature agrees with the sign change.
fn refine_cell(fe: &FreeEnergy, a: f64, b: f64, sign_a: i8, opts: &SearchOptions) -> Result<StationaryPoint> {
    let x = refine(fe, a, b, opts)?;
    let kind = if sign_a < 0 { StationaryKind::Minimum } else { StationaryKind::Maximum };
    let curvature = g_derivative(fe, 2, x);
    let thr = opts.zero_threshold(fe.beta(), 2);
    let contradicts = match kind {
        StationaryKind::Minimum => curvature < -thr,
        _ => curvature > thr,
    };
    if contradicts {
        return Err(Error::GridTooCoarse { x });
    }
    Ok(StationaryPoint { x, kind, g: g_value(fe, x) })
}

/// Finds a point `x + t * e` with `sign(G') == want`, shrinking `e`.
fn probe_side(fe: &FreeEnergy, x: f64, span: f64, want: i8) -> Option<f64> {
    let mut e = 0.5 * span;
    for _ in 0..MAX_HALVINGS {
        let p = x + e;
        if p == x {
            return None;
        }
        if sign(g_derivative(fe, 1, p)) == want {
            return Some(p);
        }
        e *= 0.5;
    }
    None
}

/// All stationary points of `G` on `[-1, 1]`, sorted by location.
///
/// Sign changes of `G'` on the uniform grid are refined by safeguarded Newton.
/// A grid point where `G'` vanishes exactly is classified by its higher
/// derivatives; if that disagrees with a neighbouring sign, the hidden root in
/// between is located as well.
pub fn stationary_points(fe: &FreeEnergy, opts: &SearchOptions) -> Result<Vec<StationaryPoint>> {
    if opts.grid_points < 3 {
        return Err(Error::InvalidArgument("stationary-point grid needs at least 3 points".into()));
    }
    let xs = linspace(-1.0, 1.0, opts.grid_points);
    let gp: Vec<f64> = xs.iter().map(|&x| g_derivative(fe, 1, x)).collect();
    let mut points = Vec::new();

    for i in 0..xs.len() {
        if gp[i] == 0.0 {
            let x = xs[i];
            let neighbour = |j: Option<usize>| j.and_then(|j| gp.get(j)).map(|&v| sign(v)).filter(|&s| s != 0);
            let left_n = neighbour(i.checked_sub(1));
            let right_n = neighbour(Some(i + 1));
            let (right, left) = local_signs(fe, x).unwrap_or((right_n.unwrap_or(0), left_n.unwrap_or(0)));
            points.push(StationaryPoint { x, kind: kind_from_signs(left, right), g: g_value(fe, x) });

            if let Some(rn) = right_n {
                if right != 0 && rn != right {
                    let span = xs[i + 1] - x;
                    let p = probe_side(fe, x, span, right).ok_or(Error::GridTooCoarse { x })?;
                    points.push(refine_cell(fe, p, xs[i + 1], right, opts)?);
                }
            }
            if let Some(ln) = left_n {
                if left != 0 && ln != left {
                    let span = xs[i - 1] - x;
                    let p = probe_side(fe, x, span, left).ok_or(Error::GridTooCoarse { x })?;
                    points.push(refine_cell(fe, xs[i - 1], p, ln, opts)?);
                }
            }
        } else if i + 1 < xs.len() && gp[i + 1] != 0.0 && sign(gp[i]) != sign(gp[i + 1]) {
            points.push(refine_cell(fe, xs[i], xs[i + 1], sign(gp[i]), opts)?);
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    points.dedup_by(|a, b| (a.x - b.x).abs() <= opts.x_tol);
    Ok(points)
}

/// Local minima whose `G` ties with the smallest one.
pub fn raw_global_minima(points: &[StationaryPoint], opts: &SearchOptions) -> Vec<StationaryPoint> {
    let minima: Vec<_> = points.iter().filter(|p| p.kind == StationaryKind::Minimum).copied().collect();
    let g_min = minima.iter().map(|p| p.g).fold(f64::INFINITY, f64::min);
    if !g_min.is_finite() {
        return Vec::new();
    }
    let tie = opts.tie_tol(g_min);
    minima.into_iter().filter(|p| p.g - g_min <= tie).collect()
}

/// Global minima after merging minima separated only by barriers no higher
/// than the tie tolerance; such a cluster is one degenerate minimum, reported
/// at its central stationary point.
pub fn merged_global_minima(points: &[StationaryPoint], opts: &SearchOptions) -> Vec<StationaryPoint> {
    let extrema: Vec<_> = points.iter().filter(|p| p.kind != StationaryKind::Inflection).copied().collect();
    let g_min = extrema.iter().filter(|p| p.kind == StationaryKind::Minimum).map(|p| p.g).fold(f64::INFINITY, f64::min);
    if !g_min.is_finite() {
        return Vec::new();
    }
    let tie = opts.tie_tol(g_min);

    let mut clusters: Vec<Vec<StationaryPoint>> = Vec::new();
    let mut i = 0;
    while i < extrema.len() {
        if extrema[i].kind != StationaryKind::Minimum {
            i += 1;
            continue;
        }
        let mut cluster = vec![extrema[i]];
        while i + 2 < extrema.len()
            && extrema[i + 1].kind == StationaryKind::Maximum
            && extrema[i + 2].kind == StationaryKind::Minimum
            && extrema[i + 1].g - extrema[i].g <= tie
            && extrema[i + 1].g - extrema[i + 2].g <= tie
        {
            cluster.push(extrema[i + 1]);
            cluster.push(extrema[i + 2]);
            i += 2;
        }
        clusters.push(cluster);
        i += 1;
    }

    clusters
        .into_iter()
        .filter(|c| c.iter().filter(|p| p.kind == StationaryKind::Minimum).any(|p| p.g - g_min <= tie))
        .map(|c| c[c.len() / 2])
        .collect()
}

/// Type and strength of the minimum of `G` at `m`.
pub fn classify_minimum(rf: &RateFunction, m: f64) -> Result<MinimumReport> {
    classify_with(rf.free_energy(), m, &SearchOptions::default())
}

fn classify_with(fe: &FreeEnergy, m: f64, opts: &SearchOptions) -> Result<MinimumReport> {
    let gradient = g_derivative(fe, 1, m);
    if gradient.abs() > 1e-9 {
        return Err(Error::NotStationary { x: m, gradient: gradient.abs() });
    }
    for k in 1..=3u32 {
        let order = 2 * k as usize;
        let d = g_derivative(fe, order, m);
        if d.abs() > opts.zero_threshold(fe.beta(), order) {
            if d < 0.0 {
                return Err(Error::NotAMinimum { x: m });
            }
            return Ok(MinimumReport { location: m, order: k, strength: d, value: g_value(fe, m) });
        }
    }
    Err(Error::DegenerateMinimum { x: m })
}

fn global_reports(fe: &FreeEnergy, opts: &SearchOptions) -> Result<Vec<MinimumReport>> {
    let points = stationary_points(fe, opts)?;
    merged_global_minima(&points, opts).into_iter().map(|p| classify_with(fe, p.x, opts)).collect()
}

/// Every global minimum of `G`, classified, sorted by location. `tol` is the
/// location tolerance of the refinement.
pub fn find_global_minima(rf: &RateFunction, tol: f64) -> Result<Vec<MinimumReport>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let opts = SearchOptions { x_tol: tol, ..SearchOptions::default() };
    global_reports(rf.free_energy(), &opts)
}

/// Phase implied by a list of global minima.
pub fn phase_from_minima(minima: &[MinimumReport]) -> Result<PhaseLabel> {
    let all_type = |k: u32| minima.iter().all(|m| m.order == k);
    match minima.len() {
        0 => Err(Error::Unclassified("no global minimum".into())),
        1 => Ok(match minima[0].order {
            1 => PhaseLabel::Paramagnetic,
            2 => PhaseLabel::SecondOrder,
            _ => PhaseLabel::Tricritical,
        }),
        2 if all_type(1) => {
            let symmetric = (minima[0].location + minima[1].location).abs() <= 1e-6;
            Ok(if symmetric { PhaseLabel::Ferromagnetic } else { PhaseLabel::FirstOrder })
        }
        _ if all_type(1) => Ok(PhaseLabel::FirstOrder),
        n => Err(Error::Unclassified(format!(
            "{n} global minima of types {:?}",
            minima.iter().map(|m| m.order).collect::<Vec<_>>()
        ))),
    }
}

/// Phase of the model at the rate function's `β`.
pub fn classify_phase(rf: &RateFunction) -> Result<PhaseLabel> {
    phase_from_minima(&find_global_minima(rf, SearchOptions::default().x_tol)?)
}

/// One-parameter family of field laws indexed by the field strength `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFamily {
    Constant,
    Dichotomous {
        #[serde(default = "half")]
        alpha: f64,
    },
    Uniform,
}

fn half() -> f64 {
    0.5
}

impl ModelFamily {
    /// The family member at strength `h`; `Uniform` at `h = 0` degenerates to
    /// the zero field.
    pub fn model(&self, h: f64) -> Result<FieldModel> {
        match *self {
            ModelFamily::Constant => FieldModel::constant(h),
            ModelFamily::Dichotomous { alpha } => FieldModel::dichotomous(h, alpha),
            ModelFamily::Uniform if h == 0.0 => FieldModel::constant(0.0),
            ModelFamily::Uniform => FieldModel::uniform(h),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            ModelFamily::Constant => false,
            ModelFamily::Dichotomous { alpha } => alpha == 0.5,
            ModelFamily::Uniform => true,
        }
    }
}

/// Whether `G` at `(model, β)` has a global minimizer away from the origin.
pub fn ordered_at(model: &FieldModel, beta: f64) -> Result<bool> {
    let fe = FreeEnergy::new(model.clone(), beta)?;
    let opts = SearchOptions::default();
    let points = stationary_points(&fe, &opts)?;
    Ok(raw_global_minima(&points, &opts).iter().any(|p| p.x.abs() > ORIGIN_TOL))
}

/// Bisection tolerance of [`critical_beta`].
pub const CRITICAL_BETA_TOL: f64 = 1e-10;

/// `β_c(h)`: the infimum of `β` for which `G` has a non-zero global
/// minimizer, bisected inside `bracket` to [`CRITICAL_BETA_TOL`]. Returns the
/// upper end of the final bracket, where the ordered minima are present.
pub fn critical_beta(model: &FieldModel, bracket: (f64, f64)) -> Result<f64> {
    if !model.is_symmetric() {
        return Err(Error::InvalidArgument("critical_beta needs a symmetric field law".into()));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid beta bracket [{lo}, {hi}]")));
    }
    if ordered_at(model, lo)? || !ordered_at(model, hi)? {
        return Err(Error::BadBracket { lo, hi });
    }
    let mut failure = None;
    let (_, beta_c) = roots::bisect_predicate(
        |b| match ordered_at(model, b) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                true
            }
        },
        lo,
        hi,
        CRITICAL_BETA_TOL,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(beta_c),
    }
}

/// `β_c(h)` for a member of a symmetric family.
pub fn critical_beta_in(family: ModelFamily, h: f64, bracket: (f64, f64)) -> Result<f64> {
    critical_beta(&family.model(h)?, bracket)
}

/// The tricritical point `(β, h)` of a family: the common root of `G''(0)`
/// and `G''''(0)`, by 2-D Newton from `guess`.
pub fn tricritical_point(family: ModelFamily, guess: (f64, f64)) -> Result<(f64, f64)> {
    // G''(0)/β and -G''''(0)/β⁴ share the roots and are better scaled.
    let residual = |beta: f64, h: f64| -> Result<[f64; 2]> {
        let fe = FreeEnergy::new(family.model(h)?, beta)?;
        Ok([1.0 - beta * fe.second_derivative(0.0), fe.derivative_of_order(4, 0.0)])
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let (mut beta, mut h) = guess;
    let mut r = residual(beta, h)?;
    let step = 1e-7;
    for _ in 0..100 {
        if norm(r) < 1e-14 {
            return Ok((beta, h));
        }
        let rb_p = residual(beta + step, h)?;
        let rb_m = residual(beta - step, h)?;
        let rh_p = residual(beta, h + step)?;
        let rh_m = residual(beta, h - step)?;
        let j = [
            [(rb_p[0] - rb_m[0]) / (2.0 * step), (rh_p[0] - rh_m[0]) / (2.0 * step)],
            [(rb_p[1] - rb_m[1]) / (2.0 * step), (rh_p[1] - rh_m[1]) / (2.0 * step)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let db = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dh = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nb, nh) = (beta - t * db, h - t * dh);
            if nb > 0.0 && nh > 0.0 {
                if let Ok(nr) = residual(nb, nh) {
                    if norm(nr) < norm(r) {
                        beta = nb;
                        h = nh;
                        r = nr;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if (t * db).abs().max((t * dh).abs()) < 1e-15 {
            break;
        }
    }
    if norm(r) < 1e-10 {
        Ok((beta, h))
    } else {
        Err(Error::NoConvergence { iterations: 100, lo: beta, hi: h })
    }
}

/// Classification of one `(β, h)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub beta: f64,
    pub h: f64,
    /// `None` when the minima fall outside the taxonomy or the search failed.
    pub phase: Option<PhaseLabel>,
    pub minima: Vec<MinimumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PhaseCell {
    fn evaluate(family: ModelFamily, beta: f64, h: f64) -> PhaseCell {
        let result = family
            .model(h)
            .and_then(|m| FreeEnergy::new(m, beta))
            .and_then(|fe| global_reports(&fe, &SearchOptions::default()));
        match result {
            Ok(minima) => match phase_from_minima(&minima) {
                Ok(p) => PhaseCell { beta, h, phase: Some(p), minima, note: None },
                Err(e) => PhaseCell { beta, h, phase: None, minima, note: Some(e.to_string()) },
            },
            Err(e) => PhaseCell { beta, h, phase: None, minima: Vec::new(), note: Some(e.to_string()) },
        }
    }

    fn csv_row(&self) -> String {
        let phase = self.phase.map_or("unclassified", PhaseLabel::as_str);
        format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(self.beta),
            fmt_f64(self.h),
            phase,
            self.minima.len(),
            fmt_list(&self.minima, |m| fmt_f64(m.location)),
            fmt_list(&self.minima, |m| m.order.to_string()),
            fmt_list(&self.minima, |m| fmt_f64(m.strength)),
        )
    }
}

/// A `(β, h)` lattice of phase labels plus the labels on the critical line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseScan {
    pub family: ModelFamily,
    pub cells: Vec<PhaseCell>,
    /// One entry per lattice `h` whose critical `β` lies inside the `β` range.
    pub critical_line: Vec<PhaseCell>,
}

pub const PHASE_CSV_HEADER: &str = "beta,h,phase,n_minima,m_values,k_values,lambda_values";

impl PhaseScan {
    /// Lattice rows first (β fastest), then critical-line rows by `h`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PHASE_CSV_HEADER);
        out.push('\n');
        for cell in self.cells.iter().chain(&self.critical_line) {
            out.push_str(&cell.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phase scan serializes")
    }
}

/// Classifies every point of a `beta_points x h_points` lattice, and for
/// symmetric families locates `β_c(h)` at each lattice `h` and classifies there.
pub fn phase_scan(
    family: ModelFamily,
    beta_range: (f64, f64),
    h_range: (f64, f64),
    resolution: (usize, usize),
    exec: Execution,
) -> Result<PhaseScan> {
    let (nb, nh) = resolution;
    if nb == 0 || nh == 0 {
        return Err(Error::InvalidArgument("scan resolution must be positive".into()));
    }
    if !(beta_range.0 > 0.0 && beta_range.1 >= beta_range.0) {
        return Err(Error::InvalidArgument(format!("invalid beta range {beta_range:?}")));
    }
    if !(h_range.0 >= 0.0 && h_range.1 >= h_range.0) {
        return Err(Error::InvalidArgument(format!("invalid h range {h_range:?}")));
    }
    let betas = linspace(beta_range.0, beta_range.1, nb);
    let hs = linspace(h_range.0, h_range.1, nh);
    let lattice: Vec<(f64, f64)> = hs.iter().flat_map(|&h| betas.iter().map(move |&b| (b, h))).collect();
    let cells = exec.map(&lattice, |&(b, h)| PhaseCell::evaluate(family, b, h));

    let critical_line = if beta_range.1 > beta_range.0 {
        let found = exec.map(&hs, |&h| {
            let model = family.model(h).ok().filter(FieldModel::is_symmetric)?;
            let beta_c = critical_beta(&model, beta_range).ok()?;
            Some(PhaseCell::evaluate(family, beta_c, h))
        });
        found.into_iter().flatten().collect()
    } else {
        Vec::new()
    };
    Ok(PhaseScan { family, cells, critical_line })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(model: FieldModel, beta: f64) -> RateFunction {
        RateFunction::new(model, beta).unwrap()
    }

    /// Positive root of m = tanh(βm) by fixed-point iteration.
    fn curie_weiss_magnetization(beta: f64) -> f64 {
        let mut m = 1.0f64;
        for _ in 0..10_000 {
            m = (beta * m).tanh();
        }
        m
    }

    #[test]
    fn subcritical_zero_field_has_single_minimum_at_origin() {
        let minima = find_global_minima(&rf(FieldModel::constant(0.0).unwrap(), 0.5), 1e-13).unwrap();
        assert_eq!(minima.len(), 1);
        assert_eq!(minima[0].location, 0.0);
        assert_eq!(minima[0].order, 1);
    }

    #[test]
    fn supercritical_zero_field_has_symmetric_pair() {
        let m_star = curie_weiss_magnetization(2.0);
        assert!((m_star - 0.9575).abs() < 1e-4);
        let minima = find_global_minima(&rf(FieldModel::constant(0.0).unwrap(), 2.0), 1e-13).unwrap();
        assert_eq!(minima.len(), 2);
        assert!((minima[0].location + m_star).abs() < 1e-12);
        assert!((minima[1].location - m_star).abs() < 1e-12);
        assert!(minima.iter().all(|m| m.order == 1 && m.strength > 0.0));
    }

    #[test]
    fn boundary_field_gap_drops_below_tie_tolerance_at_large_beta() {
        // at h = 1/2 the outer minima sit above G(0) by about e^{-β}/2
        let r = rf(FieldModel::dichotomous(0.5, 0.5).unwrap(), 30.0);
        let opts = SearchOptions::default();
        let points = stationary_points(r.free_energy(), &opts).unwrap();
        let minima: Vec<_> = points.iter().filter(|p| p.kind == StationaryKind::Minimum).collect();
        let origin = minima.iter().find(|p| p.x.abs() < 1e-12).unwrap();
        assert!(minima.iter().all(|p| p.g >= origin.g));
        assert_eq!(find_global_minima(&r, 1e-13).unwrap().len(), 3);
    }

    #[test]
    fn strong_dichotomous_field_pins_minimum_at_origin() {
        for &h in &[0.5, 0.7, 1.5] {
            for &beta in &[0.5, 2.0, 8.0] {
                let minima = find_global_minima(&rf(FieldModel::dichotomous(h, 0.5).unwrap(), beta), 1e-13).unwrap();
                assert_eq!(minima.len(), 1, "h={h} beta={beta}: {minima:?}");
                assert!(minima[0].location.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn critical_zero_field_minimum_is_type_two_with_strength_two() {
        let r = classify_minimum(&rf(FieldModel::constant(0.0).unwrap(), 1.0), 0.0).unwrap();
        assert_eq!(r.order, 2);
        assert!((r.strength - 2.0).abs() < 1e-12);
        // cross-check the strength by a fourth finite difference of G
        let rate = rf(FieldModel::constant(0.0).unwrap(), 1.0);
        let d = 1e-2;
        let g = |x: f64| rate.g(x);
        let fd4 = (g(2.0 * d) - 4.0 * g(d) + 6.0 * g(0.0) - 4.0 * g(-d) + g(-2.0 * d)) / d.powi(4);
        assert!((fd4 - 2.0).abs() < 1e-3, "{fd4}");
    }

    #[test]
    fn generic_minimum_is_type_one() {
        let rate = rf(FieldModel::constant(0.0).unwrap(), 2.0);
        let m = curie_weiss_magnetization(2.0);
        let r = classify_minimum(&rate, m).unwrap();
        assert_eq!(r.order, 1);
        assert!((r.strength - rate.g_derivative(2, m)).abs() < 1e-15);
    }

    #[test]
    fn tricritical_dichotomous_point_is_type_three() {
        let h_c = (2.0 / 3.0) * 1.5f64.sqrt().acosh();
        let rate = rf(FieldModel::dichotomous(h_c, 0.5).unwrap(), 1.5);
        let r = classify_minimum(&rate, 0.0).unwrap();
        assert_eq!(r.order, 3);
        assert!(r.strength > 0.0);
    }

    #[test]
    fn classify_rejects_non_stationary_points() {
        let rate = rf(FieldModel::constant(0.0).unwrap(), 2.0);
        assert!(matches!(classify_minimum(&rate, 0.3), Err(Error::NotStationary { .. })));
        assert!(matches!(classify_minimum(&rate, 0.0), Err(Error::NotAMinimum { .. })));
    }

    #[test]
    fn expansion_residual_has_stable_constant() {
        let rate = rf(FieldModel::dichotomous(0.3, 0.5).unwrap(), 2.0);
        let minima = find_global_minima(&rate, 1e-13).unwrap();
        for m in minima {
            let k = m.order as i32;
            let fact: f64 = (1..=2 * k).map(f64::from).product();
            let c = |d: f64| {
                (rate.g(m.location + d) - m.value - m.strength * d.powi(2 * k) / fact).abs() / d.powi(2 * k + 1)
            };
            let cs: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&d| c(d)).collect();
            assert!((cs[0] - cs[1]).abs() < 0.1 * cs[1] + 1e-6, "{cs:?}");
            assert!((cs[1] - cs[2]).abs() < 0.1 * cs[2] + 1e-6, "{cs:?}");
        }
    }

    #[test]
    fn phase_labels_follow_minima_table() {
        let r = |location, order| MinimumReport { location, order, strength: 1.0, value: 0.0 };
        assert_eq!(phase_from_minima(&[r(0.0, 1)]).unwrap(), PhaseLabel::Paramagnetic);
        assert_eq!(phase_from_minima(&[r(-0.5, 1), r(0.5, 1)]).unwrap(), PhaseLabel::Ferromagnetic);
        assert_eq!(phase_from_minima(&[r(-0.5, 1), r(0.0, 1), r(0.5, 1)]).unwrap(), PhaseLabel::FirstOrder);
        assert_eq!(phase_from_minima(&[r(0.0, 2)]).unwrap(), PhaseLabel::SecondOrder);
        assert_eq!(phase_from_minima(&[r(0.0, 3)]).unwrap(), PhaseLabel::Tricritical);
        assert!(phase_from_minima(&[r(-0.5, 2), r(0.5, 2)]).is_err());
        assert!(phase_from_minima(&[]).is_err());
    }

    #[test]
    fn classical_critical_beta_is_one() {
        let b = critical_beta(&FieldModel::constant(0.0).unwrap(), (0.5, 2.0)).unwrap();
        assert!((b - 1.0).abs() < 1e-8, "{b}");
    }

    #[test]
    fn critical_beta_rejects_bad_brackets_and_asymmetric_laws() {
        let m = FieldModel::constant(0.0).unwrap();
        assert!(matches!(critical_beta(&m, (1.5, 2.0)), Err(Error::BadBracket { .. })));
        assert!(critical_beta(&FieldModel::constant(0.1).unwrap(), (0.5, 2.0)).is_err());
    }

    #[test]
    fn dichotomous_critical_line_increases() {
        let fam = ModelFamily::Dichotomous { alpha: 0.5 };
        let b2 = critical_beta_in(fam, 0.2, (0.5, 100.0)).unwrap();
        let b4 = critical_beta_in(fam, 0.4, (0.5, 100.0)).unwrap();
        let b49 = critical_beta_in(fam, 0.49, (0.5, 100.0)).unwrap();
        assert!(1.0 < b2 && b2 < b4 && b4 < b49, "{b2} {b4} {b49}");
    }

    #[test]
    fn uniform_critical_line_increases() {
        let b5 = critical_beta_in(ModelFamily::Uniform, 0.5, (0.5, 100.0)).unwrap();
        let b9 = critical_beta_in(ModelFamily::Uniform, 0.9, (0.5, 100.0)).unwrap();
        assert!(b9 > b5, "{b5} {b9}");
    }

    #[test]
    fn tricritical_newton_hits_closed_form() {
        let (beta, h) = tricritical_point(ModelFamily::Dichotomous { alpha: 0.5 }, (1.3, 0.35)).unwrap();
        let h_c = (2.0 / 3.0) * 1.5f64.sqrt().acosh();
        assert!((h - h_c).abs() < 1e-10, "{h} vs {h_c}");
        assert!((beta - 1.5).abs() < 1e-10);
    }

    #[test]
    fn model_family_json() {
        let f: ModelFamily = serde_json::from_str(r#"{"family": "dichotomous"}"#).unwrap();
        assert_eq!(f, ModelFamily::Dichotomous { alpha: 0.5 });
        let f: ModelFamily = serde_json::from_str(r#"{"family": "uniform"}"#).unwrap();
        assert!(f.is_symmetric());
        assert_eq!(f.model(0.0).unwrap(), FieldModel::Constant { h: 0.0 });
    }

    #[test]
    fn scan_csv_has_fixed_header() {
        let scan = phase_scan(ModelFamily::Constant, (0.5, 2.0), (0.0, 0.0), (3, 1), Execution::Sequential).unwrap();
        let csv = scan.to_csv();
        assert!(csv.starts_with("beta,h,phase,n_minima,m_values,k_values,lambda_values\n"));
        // three lattice rows and the critical point at h = 0
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().last().unwrap().starts_with("1.0000000000"));
        assert!(phase_scan(ModelFamily::Constant, (0.5, 2.0), (0.0, 0.0), (0, 1), Execution::Sequential).is_err());
    }
}
