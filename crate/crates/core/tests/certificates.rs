use sumset_core::recurrence::{
    close_certificate, verify_bundle, verify_certificate, CertificateBundle, CertificateCheck, ClosureParams,
    FailureReason, RecurrenceCertificate,
};
use sumset_core::{CantorIfs, Interval};

fn closed() -> (CantorIfs, RecurrenceCertificate) {
    let k = CantorIfs::middle_thirds();
    let params = ClosureParams {
        r: 1.0,
        covered: Interval::new(0.1, 0.2),
        resolution: 0.005,
        tolerance: 0.01,
        m_bound: 2.0,
        rho: 0.01,
        word_len: 2,
        max_points: 5000,
    };
    let cert = close_certificate(&k, &k, &params, |_| true).unwrap();
    (k, cert)
}

#[test]
fn closure_survives_a_json_round_trip() {
    let (k, cert) = closed();
    let bundle = CertificateBundle {
        ifs_k: k.clone(),
        ifs_k_prime: k,
        certificates: vec![cert],
    };
    let text = serde_json::to_string_pretty(&bundle).unwrap();
    let back: CertificateBundle = serde_json::from_str(&text).unwrap();
    assert_eq!(back, bundle);
    let checks = verify_bundle(&back).unwrap();
    assert!(checks.iter().all(CertificateCheck::is_ok), "{checks:?}");
}

#[test]
fn moved_image_is_caught() {
    let (k, mut cert) = closed();
    let last = cert.entries.len() - 1;
    cert.entries[last].image.r *= 1.0 + 1e-6;
    match verify_certificate(&cert, &k, &k, None).unwrap() {
        CertificateCheck::Failed { index, reason, .. } => {
            assert_eq!(index, Some(last));
            assert!(matches!(reason, FailureReason::ImageMismatch { .. }));
        }
        ok => panic!("expected a failure, got {ok:?}"),
    }
}

#[test]
fn dropped_fiber_point_is_caught() {
    let (k, mut cert) = closed();
    // Remove every configuration near the middle of the fiber.
    cert.entries
        .retain(|e| !(e.configuration.r == 1.0 && (e.configuration.t - 0.15).abs() < 0.02));
    let check = verify_certificate(&cert, &k, &k, None).unwrap();
    assert!(!check.is_ok());
}
