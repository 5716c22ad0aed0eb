//! Ray casting, point inversion, line scans and the offset precision study.

pub mod invert;
pub mod raycast;
pub mod roots;
pub mod scan;

pub use invert::{invert_point, invert_point_with, Inversion};
pub use raycast::{raycast, Hit, ImplicitPatch, Ray, RaycastOptions};
pub use scan::{precision_study, scan_csv, scan_line, ScanRecord, StudyMode, StudyOptions, StudyReport};
