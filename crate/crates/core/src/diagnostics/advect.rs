use crate::error::{Error, Result};
use crate::model::{AlephRegion, CrossFieldVariant, Perturbation, RegionBoundary, AXIS_GUARD};
use crate::par;
use crate::spectral::VelocityField;

pub type Point = (f64, f64);

/// A velocity field that polylines can be carried by.
pub trait VelocitySource: Sync {
    /// Velocity at `(x, y)` and time `t`, or `None` where the field is not
    /// defined. A vertex that reaches such a point stops moving.
    fn velocity(&self, x: f64, y: f64, t: f64) -> Option<(f64, f64)>;

    /// Region boundary crossed at `(x, y)`, for sources with a work region.
    fn boundary_violation(&self, _x: f64, _y: f64) -> Option<RegionBoundary> {
        None
    }
}

/// Model field plus an optional perturbation, defined off the axis guard band.
pub struct ModelSource<'a> {
    pub variant: CrossFieldVariant,
    pub nu: Option<&'a Perturbation>,
    /// Exits from this region are recorded; advection continues.
    pub region: Option<AlephRegion>,
    pub axis_guard: f64,
}

impl<'a> ModelSource<'a> {
    pub fn new(variant: CrossFieldVariant) -> Self {
        ModelSource {
            variant,
            nu: None,
            region: None,
            axis_guard: AXIS_GUARD,
        }
    }

    pub fn with_perturbation(mut self, nu: &'a Perturbation) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn with_region(mut self, region: AlephRegion) -> Self {
        self.region = Some(region);
        self
    }
}

impl VelocitySource for ModelSource<'_> {
    fn velocity(&self, x: f64, y: f64, t: f64) -> Option<(f64, f64)> {
        if !(x >= self.axis_guard && y >= self.axis_guard && x.is_finite() && y.is_finite()) {
            return None;
        }
        let (mut u, mut v) = self.variant.eval(x, y);
        if let Some(nu) = self.nu {
            let (a, b) = nu.eval(x, y, t);
            u += a;
            v += b;
        }
        Some((u, v))
    }

    fn boundary_violation(&self, x: f64, y: f64) -> Option<RegionBoundary> {
        self.region.and_then(|r| r.violation(x, y))
    }
}

/// Solver velocities stored at increasing times: bilinear in space, linear in
/// time, held constant outside the stored time range.
pub struct SnapshotSequence {
    frames: Vec<(f64, VelocityField)>,
}

impl SnapshotSequence {
    pub fn new(frames: Vec<(f64, VelocityField)>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidArgument("snapshot sequence is empty".into()));
        }
        if frames.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        let n = frames[0].1.grid().n();
        if let Some((_, f)) = frames.iter().find(|(_, f)| f.grid().n() != n) {
            return Err(Error::GridMismatch {
                expected: n,
                found: f.grid().n(),
            });
        }
        Ok(SnapshotSequence { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().map(|(t, _)| *t)
    }
}

impl VelocitySource for SnapshotSequence {
    fn velocity(&self, x: f64, y: f64, t: f64) -> Option<(f64, f64)> {
        let f = &self.frames;
        let k = f.partition_point(|(tk, _)| *tk <= t);
        if k == 0 {
            return Some(f[0].1.sample(x, y));
        }
        if k == f.len() {
            return Some(f[k - 1].1.sample(x, y));
        }
        let (t0, a) = (&f[k - 1].0, &f[k - 1].1);
        let (t1, b) = (&f[k].0, &f[k].1);
        let w = (t - t0) / (t1 - t0);
        let (ua, va) = a.sample(x, y);
        let (ub, vb) = b.sample(x, y);
        Some((ua + w * (ub - ua), va + w * (vb - va)))
    }
}

/// Any closure `(x, y, t) -> (u, v)` defined everywhere.
pub struct FnSource<F>(pub F);

impl<F> VelocitySource for FnSource<F>
where
    F: Fn(f64, f64, f64) -> (f64, f64) + Sync,
{
    fn velocity(&self, x: f64, y: f64, t: f64) -> Option<(f64, f64)> {
        Some((self.0)(x, y, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitKind {
    Region(RegionBoundary),
    /// The field became undefined; the vertex was frozen there.
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexExit {
    pub vertex: usize,
    pub t: f64,
    pub point: Point,
    pub kind: ExitKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectOptions {
    pub dt: f64,
    /// Insert a vertex wherever adjacent images end up farther apart than this.
    pub refine_threshold: Option<f64>,
    pub max_vertices: usize,
    /// Treat the polyline as a closed polygon (the last edge wraps around).
    pub closed: bool,
}

impl Default for AdvectOptions {
    fn default() -> Self {
        AdvectOptions {
            dt: 1e-3,
            refine_threshold: None,
            max_vertices: 1 << 16,
            closed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvectedPolyline {
    /// Initial vertices, including any inserted by refinement.
    pub initial: Vec<Point>,
    pub points: Vec<Point>,
    pub exits: Vec<VertexExit>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Carried {
    end: Point,
    exit: Option<(f64, Point, ExitKind)>,
}

fn carry(source: &dyn VelocitySource, p: Point, t_end: f64, dt: f64) -> Carried {
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let (mut x, mut y) = p;
    let mut exit = None;
    let f = |x: f64, y: f64, t: f64| source.velocity(x, y, t);
    for s in 0..steps {
        let t = s as f64 * h;
        let k = (|| {
            let k1 = f(x, y, t)?;
            let k2 = f(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1, t + 0.5 * h)?;
            let k3 = f(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1, t + 0.5 * h)?;
            let k4 = f(x + h * k3.0, y + h * k3.1, t + h)?;
            Some((
                (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) / 6.0,
                (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) / 6.0,
            ))
        })();
        let Some((u, v)) = k else {
            exit = Some((t, (x, y), ExitKind::Undefined));
            break;
        };
        x += h * u;
        y += h * v;
        if exit.is_none() {
            if let Some(b) = source.boundary_violation(x, y) {
                exit = Some((t + h, (x, y), ExitKind::Region(b)));
            }
        }
    }
    Carried { end: (x, y), exit }
}

/// Carries every vertex over `[0, t_end]` with fixed-step RK4. Without
/// refinement the vertex count is preserved. With refinement, midpoints of
/// the initial edges are inserted and carried from the start until adjacent
/// images are within the threshold or `max_vertices` is reached.
pub fn advect_polyline(
    source: &dyn VelocitySource,
    polyline: &[Point],
    t_end: f64,
    opts: &AdvectOptions,
) -> Result<AdvectedPolyline> {
    if polyline.is_empty() {
        return Err(Error::InvalidArgument("cannot advect an empty polyline".into()));
    }
    if !(opts.dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "advection needs dt > 0 and t_end >= 0, got dt = {}, t_end = {t_end}",
            opts.dt
        )));
    }
    let mut initial = polyline.to_vec();
    let mut carried: Vec<Carried> = par::map_slice(&initial, |&p| carry(source, p, t_end, opts.dt));
    if let Some(threshold) = opts.refine_threshold {
        loop {
            let m = initial.len();
            let edges = if opts.closed { m } else { m - 1 };
            let long: Vec<usize> = (0..edges)
                .filter(|&k| {
                    let (a, b) = (carried[k].end, carried[(k + 1) % m].end);
                    (a.0 - b.0).hypot(a.1 - b.1) > threshold
                })
                .collect();
            if long.is_empty() || m + long.len() > opts.max_vertices {
                break;
            }
            let mids: Vec<Point> = long
                .iter()
                .map(|&k| {
                    let (a, b) = (initial[k], initial[(k + 1) % m]);
                    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
                })
                .collect();
            let new: Vec<Carried> = par::map_slice(&mids, |&p| carry(source, p, t_end, opts.dt));
            let mut ni = Vec::with_capacity(m + mids.len());
            let mut nc = Vec::with_capacity(m + mids.len());
            let mut next = 0;
            for k in 0..m {
                ni.push(initial[k]);
                nc.push(carried[k]);
                if next < long.len() && long[next] == k {
                    ni.push(mids[next]);
                    nc.push(new[next]);
                    next += 1;
                }
            }
            initial = ni;
            carried = nc;
        }
    }
    let exits = carried
        .iter()
        .enumerate()
        .filter_map(|(vertex, c)| {
            c.exit.map(|(t, point, kind)| VertexExit {
                vertex,
                t,
                point,
                kind,
            })
        })
        .collect();
    Ok(AdvectedPolyline {
        initial,
        points: carried.iter().map(|c| c.end).collect(),
        exits,
        closed: opts.closed,
    })
}

/// Signed shoelace area of a closed polygon (positive counter-clockwise).
pub fn polygon_area(points: &[Point]) -> f64 {
    let m = points.len();
    if m < 3 {
        return 0.0;
    }
    // centered for cancellation-free sums on tiny polygons far from the origin
    let (cx, cy) = points[0];
    let mut acc = 0.0;
    for k in 0..m {
        let (x0, y0) = points[k];
        let (x1, y1) = points[(k + 1) % m];
        acc += (x0 - cx) * (y1 - cy) - (x1 - cx) * (y0 - cy);
    }
    0.5 * acc
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
        .sum()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.0 - a.0 - s * dx).hypot(p.1 - a.1 - s * dy)
}

fn edges(points: &[Point], closed: bool) -> impl Iterator<Item = (Point, Point)> + '_ {
    let m = points.len();
    let count = if closed { m } else { m.saturating_sub(1) };
    (0..count).map(move |k| (points[k], points[(k + 1) % m]))
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Exact minimum distance between two polylines: zero if they cross,
/// otherwise the least vertex-to-segment distance in either direction.
pub fn polyline_distance(a: &[Point], a_closed: bool, b: &[Point], b_closed: bool) -> f64 {
    let rows = par::map_slice(a, |&p| {
        edges(b, b_closed)
            .map(|(s, e)| point_segment_distance(p, s, e))
            .fold(f64::INFINITY, f64::min)
    });
    let cols = par::map_slice(b, |&p| {
        edges(a, a_closed)
            .map(|(s, e)| point_segment_distance(p, s, e))
            .fold(f64::INFINITY, f64::min)
    });
    let d = rows.into_iter().chain(cols).fold(f64::INFINITY, f64::min);
    if d > 0.0 {
        for (s, e) in edges(a, a_closed) {
            if edges(b, b_closed).any(|(u, v)| segments_cross(s, e, u, v)) {
                return 0.0;
            }
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchRecord {
    /// Arclength of the segment image.
    pub length: f64,
    /// Distance from the segment image to the circle image.
    pub thickness: f64,
    pub area_product: f64,
}

pub fn stretch_and_thickness(segment: &[Point], circle: &[Point]) -> Result<StretchRecord> {
    if segment.len() < 2 || circle.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "degenerate polylines: segment has {} vertices, circle has {}",
            segment.len(),
            circle.len()
        )));
    }
    let length = polyline_length(segment);
    if !(length > 0.0) || polygon_area(circle) == 0.0 {
        return Err(Error::InvalidArgument("degenerate polylines: zero length or area".into()));
    }
    let thickness = polyline_distance(segment, false, circle, true);
    Ok(StretchRecord {
        length,
        thickness,
        area_product: length * thickness,
    })
}

pub fn circle_polyline(center: Point, radius: f64, vertices: usize) -> Vec<Point> {
    (0..vertices)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / vertices as f64;
            (center.0 + radius * a.cos(), center.1 + radius * a.sin())
        })
        .collect()
}

/// Where the chord sits inside the disc: along the diameter at `angle`,
/// covering the centered fraction `fraction` of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordPlacement {
    pub angle: f64,
    pub fraction: f64,
    pub vertices: usize,
}

impl Default for ChordPlacement {
    fn default() -> Self {
        ChordPlacement {
            angle: 0.0,
            fraction: 0.5,
            vertices: 17,
        }
    }
}

pub fn chord_polyline(center: Point, radius: f64, chord: &ChordPlacement) -> Vec<Point> {
    let half = 0.5 * chord.fraction * 2.0 * radius;
    let (c, s) = (chord.angle.cos(), chord.angle.sin());
    let m = chord.vertices.max(2);
    (0..m)
        .map(|k| {
            let r = -half + 2.0 * half * k as f64 / (m - 1) as f64;
            (center.0 + r * c, center.1 + r * s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLineReport {
    pub initial: StretchRecord,
    pub last: StretchRecord,
    pub initial_area: f64,
    pub final_area: f64,
    pub circle_vertices: usize,
    pub segment_vertices: usize,
    pub refinements: usize,
    pub circle: AdvectedPolyline,
    pub segment: AdvectedPolyline,
}

impl MaterialLineReport {
    pub fn area_drift(&self) -> f64 {
        (self.final_area - self.initial_area).abs() / self.initial_area.abs()
    }

    pub fn stretch_factor(&self) -> f64 {
        self.last.length / self.initial.length
    }
}

/// Carries a circle of `vertices` points and its inner chord over
/// `[0, t_end]`, halving the refinement threshold until the thickness
/// changes by less than 1% between passes.
pub fn material_line_experiment(
    source: &dyn VelocitySource,
    center: Point,
    radius: f64,
    vertices: usize,
    chord: &ChordPlacement,
    t_end: f64,
    dt: f64,
) -> Result<MaterialLineReport> {
    let circle0 = circle_polyline(center, radius, vertices);
    let segment0 = chord_polyline(center, radius, chord);
    let initial = stretch_and_thickness(&segment0, &circle0)?;
    let initial_area = polygon_area(&circle0);
    let mut threshold = 0.5 * radius;
    let mut previous: Option<f64> = None;
    let mut refinements = 0;
    loop {
        let opts = |closed| AdvectOptions {
            dt,
            refine_threshold: Some(threshold),
            max_vertices: 1 << 15,
            closed,
        };
        let circle = advect_polyline(source, &circle0, t_end, &opts(true))?;
        let segment = advect_polyline(source, &segment0, t_end, &opts(false))?;
        let last = stretch_and_thickness(&segment.points, &circle.points)?;
        let settled = previous
            .map(|d| (last.thickness - d).abs() <= 0.01 * d.max(f64::MIN_POSITIVE))
            .unwrap_or(false);
        let saturated = circle.points.len() >= (1 << 15) / 2 || refinements >= 12;
        if settled || saturated {
            return Ok(MaterialLineReport {
                initial,
                last,
                initial_area,
                final_area: polygon_area(&circle.points),
                circle_vertices: circle.points.len(),
                segment_vertices: segment.points.len(),
                refinements,
                circle,
                segment,
            });
        }
        previous = Some(last.thickness);
        threshold *= 0.5;
        refinements += 1;
    }
}
