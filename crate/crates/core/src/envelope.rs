//! Hardening menus and their lower convex envelopes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One hardening strategy: repair time reduction `dp` bought for `cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MenuOption {
    pub dp: f64,
    pub cost: f64,
}

impl MenuOption {
    pub const NONE: MenuOption = MenuOption { dp: 0.0, cost: 0.0 };

    pub fn new(dp: f64, cost: f64) -> Self {
        Self { dp, cost }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardeningMenu {
    pub edge: String,
    pub options: Vec<MenuOption>,
}

impl HardeningMenu {
    pub fn new(edge: impl Into<String>, options: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            edge: edge.into(),
            options: options
                .into_iter()
                .map(|(dp, cost)| MenuOption { dp, cost })
                .collect(),
        }
    }

    pub fn max_dp(&self) -> f64 {
        self.options.iter().map(|o| o.dp).fold(0.0, f64::max)
    }

    pub(crate) fn check(&self) -> Result<()> {
        for o in &self.options {
            if !(o.dp > 0.0 && o.dp.is_finite() && o.cost > 0.0 && o.cost.is_finite()) {
                return Err(Error::InvalidMenu {
                    edge: self.edge.clone(),
                    reason: format!("option ({}, {}) needs positive finite dp and cost", o.dp, o.cost),
                });
            }
        }
        Ok(())
    }

    /// True when options are strictly increasing in both `dp` and `cost`.
    pub fn is_monotone(&self) -> bool {
        self.options
            .windows(2)
            .all(|w| w[0].dp < w[1].dp && w[0].cost < w[1].cost)
    }
}

/// Drops every option that some other option matches or beats on both
/// reduction and cost. The survivors come back sorted and strictly
/// increasing in both coordinates; of exact duplicates one copy is kept.
pub fn filter_dominated(menu: &HardeningMenu) -> Result<HardeningMenu> {
    menu.check()?;
    let mut opts = menu.options.clone();
    // Largest reduction first, cheapest first among equal reductions.
    opts.sort_by(|a, b| b.dp.total_cmp(&a.dp).then(a.cost.total_cmp(&b.cost)));
    let mut kept: Vec<MenuOption> = Vec::with_capacity(opts.len());
    for o in opts {
        match kept.last() {
            Some(best) if o.cost >= best.cost => {}
            _ => kept.push(o),
        }
    }
    kept.reverse();
    Ok(HardeningMenu {
        edge: menu.edge.clone(),
        options: kept,
    })
}

/// One linear piece of an envelope, in coordinates relative to the
/// envelope's origin: cost is `intercept + slope * (dp - lower)` on
/// `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Segment {
    pub fn cost(&self) -> f64 {
        self.slope * (self.upper - self.lower)
    }
}

/// Lower convex envelope of a menu's piecewise-linear cost curve.
///
/// `origin` is the strategy already in place ((0, 0) for an unhardened
/// edge). Segments are measured from it, and `breakpoints[k]` is the menu
/// option, in absolute terms, sitting at the upper end of `segments[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEnvelope {
    pub edge: String,
    pub origin: MenuOption,
    pub segments: Vec<Segment>,
    pub breakpoints: Vec<MenuOption>,
}

impl CostEnvelope {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Largest reduction reachable, relative to the origin.
    pub fn max_dp(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.upper)
    }

    pub fn max_cost(&self) -> f64 {
        self.breakpoints
            .last()
            .map_or(0.0, |b| b.cost - self.origin.cost)
    }

    /// Cost of traversing segment `k` in full, from the exact breakpoint costs.
    pub fn segment_cost(&self, k: usize) -> f64 {
        self.breakpoints[k].cost - self.origin.cost - self.segments[k].intercept
    }

    /// Relative cost at the upper end of segment `k`.
    pub fn breakpoint_cost(&self, k: usize) -> f64 {
        self.breakpoints[k].cost - self.origin.cost
    }

    /// Envelope cost at `dp` (relative to the origin). Exact at breakpoints.
    pub fn value(&self, dp: f64) -> Result<f64> {
        let max = self.max_dp();
        if !(0.0..=max).contains(&dp) {
            return Err(Error::OutOfDomain { value: dp, max });
        }
        if dp == 0.0 {
            return Ok(0.0);
        }
        let k = self
            .segments
            .iter()
            .position(|s| dp <= s.upper)
            .expect("dp within domain");
        let seg = &self.segments[k];
        if dp == seg.upper {
            return Ok(self.breakpoints[k].cost - self.origin.cost);
        }
        Ok(seg.intercept + seg.slope * (dp - seg.lower))
    }

    /// Largest breakpoint with relative reduction at most `dp`, or `None`
    /// when only the origin qualifies.
    pub fn round_down(&self, dp: f64) -> Option<MenuOption> {
        self.segments
            .iter()
            .zip(&self.breakpoints)
            .take_while(|(s, _)| s.upper <= dp)
            .last()
            .map(|(_, b)| *b)
    }
}

/// Lower convex envelope of `menu` starting from the origin (0, 0).
/// Dominated options are filtered first.
pub fn convex_envelope(menu: &HardeningMenu) -> Result<CostEnvelope> {
    let filtered = filter_dominated(menu)?;
    Ok(envelope_from(&filtered.edge, MenuOption::NONE, &filtered.options))
}

/// `envelope_value` in free-function form.
pub fn envelope_value(env: &CostEnvelope, dp: f64) -> Result<f64> {
    env.value(dp)
}

/// Envelope over `options` strictly beyond `origin`, with `origin` as the
/// new zero. `options` must be filtered (sorted, strictly monotone).
/// Collinear hull points are kept as breakpoints.
pub fn envelope_from(edge: &str, origin: MenuOption, options: &[MenuOption]) -> CostEnvelope {
    let pts: Vec<MenuOption> = options
        .iter()
        .filter(|o| o.dp > origin.dp && o.cost > origin.cost)
        .copied()
        .collect();

    // Monotone chain over (0,0) followed by the relative points.
    let rel = |o: &MenuOption| (o.dp - origin.dp, o.cost - origin.cost);
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(pts.len() + 1);
    hull.push((0.0, 0.0, usize::MAX));
    for (i, p) in pts.iter().enumerate() {
        let c = rel(p);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((c.0, c.1, i));
    }

    let mut segments = Vec::with_capacity(hull.len());
    let mut breakpoints = Vec::with_capacity(hull.len());
    let (mut x0, mut y0) = (0.0, 0.0);
    for &(x1, y1, i) in &hull[1..] {
        segments.push(Segment {
            slope: (y1 - y0) / (x1 - x0),
            intercept: y0,
            lower: x0,
            upper: x1,
        });
        breakpoints.push(pts[i]);
        x0 = x1;
        y0 = y1;
    }

    CostEnvelope {
        edge: String::from(edge),
        origin,
        segments,
        breakpoints,
    }
}
