//! Intersection tests, bounded orbits and recurrence certificates.

pub mod certificate;
pub mod intersect;
pub mod orbit;

pub use certificate::{
    close_certificate, verify_bundle, verify_certificate, CertificateBundle, CertificateCheck, CertificateEntry,
    ClosureParams, FailureReason, RecurrenceCertificate,
};
pub use intersect::{is_intersecting, is_intersecting_with, IntersectOptions, IntersectResult, IntersectWitness, Verdict};
pub use orbit::{bounded_orbit_search, bounded_orbit_search_with, escape_trajectory, OrbitOptions, OrbitRecord, OrbitStatus, OrbitStep};
