//! Growth-law measurements: rate fits, envelopes, material-line stretching,
//! perturbation-field bounds and growth-ratio tables.

mod advect;
mod bounds;
mod envelope;
mod fit;
mod growth;
mod report;
mod series;

pub use advect::{
    advect_polyline, chord_polyline, circle_polyline, material_line_experiment, polygon_area,
    polyline_distance, polyline_length, stretch_and_thickness, AdvectOptions, AdvectedPolyline,
    ChordPlacement, ExitKind, FnSource, MaterialLineReport, ModelSource, Point, SnapshotSequence,
    StretchRecord, VelocitySource, VertexExit,
};
pub use bounds::{
    bump_hessian_scaling, displaced_interface_layer, halving_family, inverse_laplacian_gradient,
    perturbation_field_bounds, BumpHessianRow, HessianScaling, PerturbationBounds, RadiusBound,
    CIRCLE_SAMPLES, LEAK_TOLERANCE,
};
pub use envelope::{envelope_check, BaseNorms, EnvelopeFit, EnvelopeKind};
pub use fit::{
    fit_double_exponential, fit_double_exponential_log, linear_fit, FitDirection, RateFit,
    MIN_FIT_SAMPLES,
};
pub use growth::{growth_ratio_probe, ratio_table_distance, GrowthRow, GrowthRun, GrowthTable};
pub use report::{CheckReport, CheckRow, ReportStatus};
pub use series::{format_sig17, read_series_csv, write_series_csv, DiagnosticSeries};
