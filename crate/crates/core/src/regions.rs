//! Association regions in the (r_m, r_s) plane.
//!
//! With the nearest macro at `r_m` and the nearest pico at `r_s`, the
//! rectangle `[0, R] x [0, r]` splits into four link-state cases (each link
//! LOS or NLOS by its own ball). Inside every case the max-power rule
//! `P_s r_s^-a_s >= P_m r_m^-a_m` separates a macro-served region from its
//! pico-served complement. [`region_spec`] gives each region in closed form
//! as a union of pieces bounded by constants and power-law curves, selected
//! by comparing the critical radii with the rectangle corners;
//! [`oracle_membership`] tests the defining inequalities directly.

use crate::config::{NetworkConfig, TierParams};
use crate::error::{Error, Result};
use crate::geometry::{nearest_distance_mass, nearest_distance_pdf, pico_preferred, Tier};
use crate::quadrature::{adaptive_gk, GaussLegendre};

/// Link-state pairing, macro link first: `NL` is a NLOS macro link with a
/// LOS pico link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkCase {
    LL,
    NL,
    LN,
    NN,
}

impl LinkCase {
    pub const ALL: [LinkCase; 4] = [LinkCase::LL, LinkCase::NL, LinkCase::LN, LinkCase::NN];

    /// Case number 1..=4.
    pub fn index(self) -> usize {
        match self {
            LinkCase::LL => 1,
            LinkCase::NL => 2,
            LinkCase::LN => 3,
            LinkCase::NN => 4,
        }
    }

    pub fn macro_los(self) -> bool {
        matches!(self, LinkCase::LL | LinkCase::LN)
    }

    pub fn pico_los(self) -> bool {
        matches!(self, LinkCase::LL | LinkCase::NL)
    }

    pub fn label(self) -> &'static str {
        match self {
            LinkCase::LL => "LL",
            LinkCase::NL => "NL",
            LinkCase::LN => "LN",
            LinkCase::NN => "NN",
        }
    }
}

/// Scalars that determine every region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    /// `P_s / P_m`.
    pub power_ratio: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// `R_L`
    pub macro_los_radius: f64,
    /// `r_L`
    pub pico_los_radius: f64,
    /// `R`
    pub macro_radius: f64,
    /// `r`
    pub pico_radius: f64,
}

impl RegionParams {
    /// Both tiers must share their path-loss exponents.
    pub fn from_config(cfg: &NetworkConfig) -> Result<Self> {
        let (m, s) = (&cfg.macro_tier, &cfg.pico_tier);
        if m.alpha_los != s.alpha_los || m.alpha_nlos != s.alpha_nlos {
            return Err(Error::Invalid(
                "closed-form regions need equal LOS/NLOS exponents in both tiers".into(),
            ));
        }
        Ok(Self {
            power_ratio: cfg.power_ratio(),
            alpha_los: m.alpha_los,
            alpha_nlos: m.alpha_nlos,
            macro_los_radius: m.los_radius,
            pico_los_radius: s.los_radius,
            macro_radius: m.disc_radius,
            pico_radius: s.disc_radius,
        })
    }

    pub fn macro_alpha(&self, case: LinkCase) -> f64 {
        if case.macro_los() {
            self.alpha_los
        } else {
            self.alpha_nlos
        }
    }

    pub fn pico_alpha(&self, case: LinkCase) -> f64 {
        if case.pico_los() {
            self.alpha_los
        } else {
            self.alpha_nlos
        }
    }

    /// `([r_m lo, r_m hi], [r_s lo, r_s hi])` of a case.
    pub fn rectangle(&self, case: LinkCase) -> ([f64; 2], [f64; 2]) {
        let rm = if case.macro_los() {
            [0.0, self.macro_los_radius]
        } else {
            [self.macro_los_radius, self.macro_radius]
        };
        let rs = if case.pico_los() {
            [0.0, self.pico_los_radius]
        } else {
            [self.pico_los_radius, self.pico_radius]
        };
        (rm, rs)
    }

    fn in_rectangle(&self, case: LinkCase, r_m: f64, r_s: f64) -> bool {
        let (rm, rs) = self.rectangle(case);
        rm[0] <= r_m && r_m <= rm[1] && rs[0] <= r_s && r_s <= rs[1]
    }
}

/// A region boundary: a constant, or `coef * other^exponent` where `other`
/// is the opposite coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Const(f64),
    Curve { coef: f64, exponent: f64 },
}

impl Bound {
    fn eval(self, other: f64) -> f64 {
        match self {
            Bound::Const(c) => c,
            Bound::Curve { coef, exponent } => coef * other.powf(exponent),
        }
    }
}

/// Closed piece `{rm.0(r_s) <= r_m <= rm.1(r_s), rs.0(r_m) <= r_s <= rs.1(r_m)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub rm: (Bound, Bound),
    pub rs: (Bound, Bound),
}

impl Piece {
    fn contains(&self, r_m: f64, r_s: f64) -> bool {
        self.rm.0.eval(r_s) <= r_m
            && r_m <= self.rm.1.eval(r_s)
            && self.rs.0.eval(r_m) <= r_s
            && r_s <= self.rs.1.eval(r_m)
    }
}

/// The closed-form region of one case and tier under given parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub case: LinkCase,
    pub tier: Tier,
    /// 1-based index of the selected branch.
    pub branch: usize,
    /// Union of pieces; empty for an empty region.
    pub pieces: Vec<Piece>,
    params: RegionParams,
}

impl RegionSpec {
    pub fn contains(&self, r_m: f64, r_s: f64) -> bool {
        self.params.in_rectangle(self.case, r_m, r_s)
            && self.pieces.iter().any(|p| p.contains(r_m, r_s))
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn params(&self) -> &RegionParams {
        &self.params
    }
}

use Bound::{Const, Curve};

fn piece(rm: (Bound, Bound), rs: (Bound, Bound)) -> Piece {
    Piece { rm, rs }
}

fn curve(coef: f64, exponent: f64) -> Bound {
    Curve { coef, exponent }
}

/// Selects the closed-form branch of a region.
pub fn region_spec(case: LinkCase, tier: Tier, p: &RegionParams) -> RegionSpec {
    let (al, an) = (p.alpha_los, p.alpha_nlos);
    let rho = an / al;
    let ratio = p.power_ratio;
    let (big_rl, small_rl, big_r, small_r) =
        (p.macro_los_radius, p.pico_los_radius, p.macro_radius, p.pico_radius);
    // (P_s/P_m)^{1/a} and its inverse
    let k_l = ratio.powf(1.0 / al);
    let k_n = ratio.powf(1.0 / an);
    let q_l = 1.0 / k_l;
    let q_n = 1.0 / k_n;
    let zero = Const(0.0);

    let (branch, pieces) = match (case, tier) {
        (LinkCase::LL, Tier::Macro) => {
            if k_l * big_rl <= small_rl {
                (1, vec![piece((zero, Const(big_rl)), (curve(k_l, 1.0), Const(small_rl)))])
            } else {
                (2, vec![piece((zero, curve(q_l, 1.0)), (zero, Const(small_rl)))])
            }
        }
        (LinkCase::LL, Tier::Pico) => {
            if k_l * big_rl <= small_rl {
                (1, vec![piece((zero, Const(big_rl)), (zero, curve(k_l, 1.0)))])
            } else {
                (2, vec![piece((curve(q_l, 1.0), Const(big_rl)), (zero, Const(small_rl)))])
            }
        }
        (LinkCase::NL, Tier::Macro) => {
            let threshold = curve(k_l, rho);
            if k_l * big_r.powf(rho) <= small_rl {
                (1, vec![piece((Const(big_rl), Const(big_r)), (threshold, Const(small_rl)))])
            } else if k_l * big_rl.powf(rho) <= small_rl {
                let edge = q_n * small_rl.powf(1.0 / rho);
                (2, vec![piece((Const(big_rl), Const(edge)), (threshold, Const(small_rl)))])
            } else {
                (3, vec![])
            }
        }
        (LinkCase::NL, Tier::Pico) => {
            let threshold = curve(k_l, rho);
            if k_l * big_r.powf(rho) <= small_rl {
                (1, vec![piece((Const(big_rl), Const(big_r)), (zero, threshold))])
            } else if k_l * big_rl.powf(rho) >= small_rl {
                (2, vec![piece((Const(big_rl), Const(big_r)), (zero, Const(small_rl)))])
            } else {
                let edge = q_n * small_rl.powf(1.0 / rho);
                (
                    3,
                    vec![
                        piece((Const(edge), Const(big_r)), (zero, Const(small_rl))),
                        piece((Const(big_rl), Const(edge)), (zero, threshold)),
                    ],
                )
            }
        }
        (LinkCase::LN, Tier::Macro) => {
            let t_edge = k_n * big_rl.powf(1.0 / rho);
            let threshold = curve(k_n, 1.0 / rho);
            if t_edge <= small_rl {
                (1, vec![piece((zero, Const(big_rl)), (Const(small_rl), Const(small_r)))])
            } else if t_edge <= small_r {
                let edge = q_l * small_rl.powf(rho);
                (
                    2,
                    vec![
                        piece((zero, Const(edge)), (Const(small_rl), Const(small_r))),
                        piece((Const(edge), Const(big_rl)), (threshold, Const(small_r))),
                    ],
                )
            } else {
                (3, vec![piece((zero, curve(q_l, rho)), (Const(small_rl), Const(small_r)))])
            }
        }
        (LinkCase::LN, Tier::Pico) => {
            let t_edge = k_n * big_rl.powf(1.0 / rho);
            let threshold = curve(k_n, 1.0 / rho);
            if t_edge <= small_rl {
                (1, vec![])
            } else if t_edge <= small_r {
                let edge = q_l * small_rl.powf(rho);
                (2, vec![piece((Const(edge), Const(big_rl)), (Const(small_rl), threshold))])
            } else {
                (3, vec![piece((curve(q_l, rho), Const(big_rl)), (Const(small_rl), Const(small_r)))])
            }
        }
        (LinkCase::NN, Tier::Macro) => {
            let threshold = curve(k_n, 1.0);
            if k_n * big_rl >= small_r {
                (1, vec![])
            } else if k_n * big_r <= small_rl {
                (2, vec![piece((Const(big_rl), Const(big_r)), (Const(small_rl), Const(small_r)))])
            } else if k_n * big_rl >= small_rl && k_n * big_r <= small_r {
                (3, vec![piece((Const(big_rl), Const(big_r)), (threshold, Const(small_r)))])
            } else if k_n * big_rl >= small_rl {
                (4, vec![piece((Const(big_rl), Const(q_n * small_r)), (threshold, Const(small_r)))])
            } else if k_n * big_r <= small_r {
                let edge = q_n * small_rl;
                (
                    5,
                    vec![
                        piece((Const(big_rl), Const(edge)), (Const(small_rl), Const(small_r))),
                        piece((Const(edge), Const(big_r)), (threshold, Const(small_r))),
                    ],
                )
            } else {
                (6, vec![piece((Const(big_rl), curve(q_n, 1.0)), (Const(small_rl), Const(small_r)))])
            }
        }
        (LinkCase::NN, Tier::Pico) => {
            let threshold = curve(k_n, 1.0);
            if k_n * big_rl >= small_r {
                (1, vec![piece((Const(big_rl), Const(big_r)), (Const(small_rl), Const(small_r)))])
            } else if k_n * big_r <= small_rl {
                (2, vec![])
            } else if k_n * big_rl >= small_rl && k_n * big_r <= small_r {
                (3, vec![piece((Const(big_rl), Const(big_r)), (Const(small_rl), threshold))])
            } else if k_n * big_rl >= small_rl {
                let edge = q_n * small_r;
                (
                    4,
                    vec![
                        piece((Const(edge), Const(big_r)), (Const(small_rl), Const(small_r))),
                        piece((Const(big_rl), Const(edge)), (Const(small_rl), threshold)),
                    ],
                )
            } else if k_n * big_r <= small_r {
                (5, vec![piece((Const(q_n * small_rl), Const(big_r)), (Const(small_rl), threshold))])
            } else {
                (6, vec![piece((curve(q_n, 1.0), Const(big_r)), (Const(small_rl), Const(small_r)))])
            }
        }
    };
    log::debug!(
        "region {}{} ({:?}-served): branch {}",
        case.index(),
        if tier == Tier::Macro { "m" } else { "s" },
        tier,
        branch
    );
    RegionSpec {
        case,
        tier,
        branch,
        pieces,
        params: *p,
    }
}

fn check_rectangle(p: &RegionParams, r_m: f64, r_s: f64) -> Result<()> {
    let ok = (0.0..=p.macro_radius).contains(&r_m) && (0.0..=p.pico_radius).contains(&r_s);
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRectangle {
            r_m,
            r_s,
            max_rm: p.macro_radius,
            max_rs: p.pico_radius,
        })
    }
}

/// Closed-form membership of `(r_m, r_s)` in the region of `case` served by `tier`.
pub fn region_membership(
    case: LinkCase,
    tier: Tier,
    params: &RegionParams,
    r_m: f64,
    r_s: f64,
) -> Result<bool> {
    check_rectangle(params, r_m, r_s)?;
    Ok(region_spec(case, tier, params).contains(r_m, r_s))
}

/// Direct test of the case rectangle and the association inequality; ties
/// go to the pico tier.
pub fn oracle_membership(case: LinkCase, tier: Tier, params: &RegionParams, r_m: f64, r_s: f64) -> bool {
    if !params.in_rectangle(case, r_m, r_s) {
        return false;
    }
    let pico = pico_preferred(
        params.power_ratio,
        r_s,
        params.pico_alpha(case),
        1.0,
        r_m,
        params.macro_alpha(case),
        1.0,
    );
    match tier {
        Tier::Pico => pico,
        Tier::Macro => !pico,
    }
}

/// True when `(r_m, r_s)` is within a relative `eps` of a case-rectangle
/// edge or of the equal-power curve.
pub fn near_boundary(case: LinkCase, params: &RegionParams, r_m: f64, r_s: f64, eps: f64) -> bool {
    let (rm, rs) = params.rectangle(case);
    let close = |x: f64, edge: f64, scale: f64| (x - edge).abs() <= eps * scale;
    if close(r_m, rm[0], params.macro_radius)
        || close(r_m, rm[1], params.macro_radius)
        || close(r_s, rs[0], params.pico_radius)
        || close(r_s, rs[1], params.pico_radius)
    {
        return true;
    }
    // log of pico / macro received power
    let margin = params.power_ratio.ln() - params.pico_alpha(case) * r_s.ln()
        + params.macro_alpha(case) * r_m.ln();
    margin.is_finite() && margin.abs() <= eps
}

/// Distance range of a single-tier term: LOS `[0, los]` or NLOS `[los, disc]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalRange {
    pub tier: Tier,
    pub los: bool,
    pub interval: [f64; 2],
}

pub fn marginal_ranges(cfg: &NetworkConfig, tier: Tier) -> [MarginalRange; 2] {
    let t = match tier {
        Tier::Macro => &cfg.macro_tier,
        Tier::Pico => &cfg.pico_tier,
    };
    [
        MarginalRange {
            tier,
            los: true,
            interval: [0.0, t.los_radius],
        },
        MarginalRange {
            tier,
            los: false,
            interval: [t.los_radius, t.disc_radius],
        },
    ]
}

// ---------------------------------------------------------------------------
// Integration over regions

const SCAN_POINTS: usize = 129;

/// Sub-intervals of `[lo, hi]` where `member` holds, located by a uniform
/// scan followed by bisection of every transition. Intervals narrower than
/// the scan step can be missed.
pub fn slice_intervals<F: Fn(f64) -> bool>(member: F, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    if !(hi > lo) {
        return Vec::new();
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let at = |i: usize| if i == SCAN_POINTS - 1 { hi } else { lo + i as f64 * step };
    let refine = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if member(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut prev_x = lo;
    let mut prev_in = false;
    for i in 0..SCAN_POINTS {
        let x = at(i);
        let inside = member(x);
        match (prev_in, inside, i) {
            (_, true, 0) => start = Some(x),
            (false, true, _) => start = Some(refine(x, prev_x)),
            (true, false, _) => {
                let end = refine(prev_x, x);
                out.push((start.take().expect("open interval"), end));
            }
            _ => {}
        }
        prev_x = x;
        prev_in = inside;
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

/// `{y : bound(y) <= x}` or `{y : bound(y) >= x}` for a nondecreasing bound,
/// as a lower or upper limit on `y`.
enum Limit {
    None,
    Empty,
    Below(f64),
    Above(f64),
}

fn invert(bound: Bound, x: f64, bound_is_lower: bool) -> Limit {
    match bound {
        Bound::Const(c) => {
            let ok = if bound_is_lower { c <= x } else { x <= c };
            if ok {
                Limit::None
            } else {
                Limit::Empty
            }
        }
        Bound::Curve { coef, exponent } => {
            // coef y^e <= x  <=>  y <= (x / coef)^{1/e}
            let y = (x / coef).powf(1.0 / exponent);
            if bound_is_lower {
                Limit::Below(y)
            } else {
                Limit::Above(y)
            }
        }
    }
}

fn merge(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

impl RegionSpec {
    /// Exact cross-section of the region at a fixed value of one
    /// coordinate. `along` names the fixed coordinate's tier: `Macro` fixes
    /// `r_m` and returns `r_s` intervals, `Pico` the reverse.
    pub fn slice(&self, along: Tier, x: f64) -> Vec<(f64, f64)> {
        let (rm, rs) = self.params.rectangle(self.case);
        let (fixed_range, free_range) = match along {
            Tier::Macro => (rm, rs),
            Tier::Pico => (rs, rm),
        };
        if !(fixed_range[0] <= x && x <= fixed_range[1]) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in &self.pieces {
            // bounds of the free coordinate, and bounds on the fixed one that
            // depend on the free coordinate
            let (free, fixed) = match along {
                Tier::Macro => (p.rs, p.rm),
                Tier::Pico => (p.rm, p.rs),
            };
            let mut lo = free.0.eval(x).max(free_range[0]);
            let mut hi = free.1.eval(x).min(free_range[1]);
            let mut empty = false;
            for (bound, is_lower) in [(fixed.0, true), (fixed.1, false)] {
                match invert(bound, x, is_lower) {
                    Limit::None => {}
                    Limit::Empty => empty = true,
                    Limit::Below(y) => hi = hi.min(y),
                    Limit::Above(y) => lo = lo.max(y),
                }
            }
            if !empty && lo < hi {
                out.push((lo, hi));
            }
        }
        merge(out)
    }
}

/// Absolute error floor of region integrals.
const REGION_ABS_TOL: f64 = 1e-13;

/// `iint_region integrand(r_m, r_s) f_m(r_m) f_s(r_s) dr_s dr_m`.
///
/// The outer integral over `r_m` is adaptive Gauss-Kronrod; at every outer
/// node the exact `r_s` cross-section of the region is integrated with
/// 32-point Gauss-Legendre.
pub fn integrate_over_region<F>(case: LinkCase, tier: Tier, cfg: &NetworkConfig, integrand: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let params = RegionParams::from_config(cfg)?;
    let spec = region_spec(case, tier, &params);
    if spec.is_empty() || !cfg.macro_tier.is_enabled() || !cfg.pico_tier.is_enabled() {
        return Ok(0.0);
    }
    let (rm, _) = params.rectangle(case);
    let rule = GaussLegendre::order32();
    let outer = |r_m: f64| {
        let inner: f64 = spec
            .slice(Tier::Macro, r_m)
            .into_iter()
            .map(|(a, b)| {
                rule.integrate(|r_s| integrand(r_m, r_s) * nearest_distance_pdf(&cfg.pico_tier, r_s), a, b)
            })
            .sum();
        inner * nearest_distance_pdf(&cfg.macro_tier, r_m)
    };
    adaptive_gk(outer, rm[0], rm[1], cfg.engine.region_rel_tol, REGION_ABS_TOL)
}

/// One region seen along its serving distance.
///
/// For a macro-served region the outer coordinate is `r_m` and the mass at
/// `d` is the pico nearest-distance probability of the `r_s` cross-section;
/// for a pico-served region the roles swap. Integrands that depend only on
/// the serving distance then reduce to one-dimensional integrals.
#[derive(Debug, Clone)]
pub struct ServingProfile {
    pub spec: RegionSpec,
    pub range: [f64; 2],
    other: TierParams,
    serving: TierParams,
    empty: bool,
}

impl ServingProfile {
    pub fn new(case: LinkCase, tier: Tier, cfg: &NetworkConfig) -> Result<Self> {
        let params = RegionParams::from_config(cfg)?;
        let spec = region_spec(case, tier, &params);
        let (rm, rs) = params.rectangle(case);
        let (range, serving, other) = match tier {
            Tier::Macro => (rm, cfg.macro_tier, cfg.pico_tier),
            Tier::Pico => (rs, cfg.pico_tier, cfg.macro_tier),
        };
        let empty = spec.is_empty() || !cfg.macro_tier.is_enabled() || !cfg.pico_tier.is_enabled();
        Ok(Self {
            spec,
            range,
            other,
            serving,
            empty,
        })
    }

    pub fn case(&self) -> LinkCase {
        self.spec.case
    }

    pub fn tier(&self) -> Tier {
        self.spec.tier
    }

    /// Probability that the other tier's nearest BS falls in the cross-section at `d`.
    pub fn mass(&self, d: f64) -> f64 {
        self.spec
            .slice(self.spec.tier, d)
            .into_iter()
            .map(|(a, b)| nearest_distance_mass(&self.other, a, b))
            .sum()
    }

    /// `int g(d) f_serving(d) mass(d) dd` over the serving range.
    pub fn integrate<G: FnMut(f64) -> f64>(&self, mut g: G, rel_tol: f64, abs_tol: f64) -> Result<f64> {
        if self.empty {
            return Ok(0.0);
        }
        adaptive_gk(
            |d| {
                let mass = self.mass(d);
                if mass == 0.0 {
                    return 0.0;
                }
                g(d) * nearest_distance_pdf(&self.serving, d) * mass
            },
            self.range[0],
            self.range[1],
            rel_tol,
            abs_tol,
        )
    }
}
