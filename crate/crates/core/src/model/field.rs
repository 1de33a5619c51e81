use crate::error::{Error, Result};
use crate::initial::ParameterLadder;

/// Default distance from the axes below which the field is not evaluated.
pub const AXIS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantKind {
    /// Closed-form integrals of the logarithmic kernel; divergence free.
    Exact,
    /// `c2 (-x ln y, y ln y)`; divergence `c2`.
    Leading,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossFieldVariant {
    pub kind: VariantKind,
    pub c1: f64,
    pub c2: f64,
}

impl Default for CrossFieldVariant {
    fn default() -> Self {
        CrossFieldVariant::exact()
    }
}

impl CrossFieldVariant {
    pub fn exact() -> Self {
        CrossFieldVariant {
            kind: VariantKind::Exact,
            c1: 0.5,
            c2: 1.0,
        }
    }

    pub fn leading() -> Self {
        CrossFieldVariant {
            kind: VariantKind::Leading,
            ..CrossFieldVariant::exact()
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            VariantKind::Exact => "exact",
            VariantKind::Leading => "leading",
        }
    }

    pub fn parse(kind: &str, c1: f64, c2: f64) -> Result<Self> {
        let kind = match kind.trim() {
            "exact" => VariantKind::Exact,
            "leading" => VariantKind::Leading,
            other => {
                return Err(Error::InvalidArgument(format!("unknown field variant `{other}`")))
            }
        };
        Ok(CrossFieldVariant { kind, c1, c2 })
    }

    /// Velocity without the guard check. Callers must keep `x, y > 0`.
    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        match self.kind {
            VariantKind::Exact => (-self.c1 * log_kernel(x, y), self.c1 * log_kernel(y, x)),
            VariantKind::Leading => {
                let l = y.ln();
                (-self.c2 * x * l, self.c2 * y * l)
            }
        }
    }

    /// Analytic `d(u, v)/d(x, y)` as `[[du/dx, du/dy], [dv/dx, dv/dy]]`.
    #[inline]
    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        match self.kind {
            VariantKind::Exact => {
                let l = (x * x + y * y).ln();
                let c = self.c1;
                [
                    [-c * l, -2.0 * c * (x / y).atan()],
                    [2.0 * c * (y / x).atan(), c * l],
                ]
            }
            VariantKind::Leading => {
                let l = y.ln();
                let c = self.c2;
                [[-c * l, -c * x / y], [0.0, c * (l + 1.0)]]
            }
        }
    }

    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        let j = self.jacobian(x, y);
        j[0][0] + j[1][1]
    }
}

/// `int_0^u ln(v^2 + s^2) ds = u ln(u^2 + v^2) - 2u + 2v atan(u/v)`.
#[inline]
pub fn log_kernel(u: f64, v: f64) -> f64 {
    u * (u * u + v * v).ln() - 2.0 * u + 2.0 * v * (u / v).atan()
}

/// Upper edge of the corner `{0 < x < y < CORNER_DOMAIN_TOP}` on which the
/// leading-order field describes the exact one up to `(x O(1), y O(1))`.
pub const CORNER_DOMAIN_TOP: f64 = 1e-3;

pub fn in_corner_domain(x: f64, y: f64) -> bool {
    0.0 < x && x < y && y < CORNER_DOMAIN_TOP
}

/// Field velocity at `(x, y)` in the open first quadrant.
pub fn cross_velocity(x: f64, y: f64, variant: &CrossFieldVariant) -> Result<(f64, f64)> {
    if !(x >= AXIS_GUARD && y >= AXIS_GUARD && x.is_finite() && y.is_finite()) {
        return Err(Error::OutsideRegion {
            x,
            y,
            region: "the first quadrant minus the axis guard band",
        });
    }
    Ok(variant.eval(x, y))
}

/// `{y > sqrt(x), x > eps1, y < eps2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlephRegion {
    pub eps1: f64,
    pub eps2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionBoundary {
    /// `y <= sqrt(x)`
    Parabola,
    /// `x <= eps1`
    Left,
    /// `y >= eps2`
    Top,
}

impl AlephRegion {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0 && eps2 < 1.0 && eps1 < eps2 * eps2) {
            return Err(Error::InvalidArgument(format!(
                "empty work region for eps1 = {eps1:e}, eps2 = {eps2:e}"
            )));
        }
        Ok(AlephRegion { eps1, eps2 })
    }

    /// Region of a ladder, using the relaxed (materialized) values.
    pub fn from_ladder(ladder: &ParameterLadder) -> Result<Self> {
        AlephRegion::new(ladder.eps1(), ladder.eps2())
    }

    /// The first boundary that `(x, y)` violates, if any.
    pub fn violation(&self, x: f64, y: f64) -> Option<RegionBoundary> {
        if !(y > 0.0 && y * y > x) {
            Some(RegionBoundary::Parabola)
        } else if !(x > self.eps1) {
            Some(RegionBoundary::Left)
        } else if !(y < self.eps2) {
            Some(RegionBoundary::Top)
        } else {
            None
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.violation(x, y).is_none()
    }
}
