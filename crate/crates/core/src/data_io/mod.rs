//! CSV ingestion, report serialization and SVG figures.

mod csv_in;
mod report;
mod svg;

pub use csv_in::{load_csv, parse_transforms, Dataset, Transform, TransformOp};
pub use report::{
    report_from_json, report_to_csv, report_to_json, write_report, OutlierEntry, ReportDocument,
    ReportFormat,
};
pub use svg::{
    render_boxplot, render_histogram, render_line_chart, render_plots, render_residual_plot,
    write_plots, PlotSet,
};

pub(crate) use report::write_bytes;
