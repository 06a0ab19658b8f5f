//! Benchmarks for the numeric kernels that dominate runtime: angular
//! quadrature, the mode-overlap pipeline, waist optimization, and the
//! excitation integrator.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fourpi_bench::{calcium_like_atom, deep_mirror, matched_rising_pulse, BOTH_KINDS};
use fourpi_core::beam::{ideal_profile, lg01_overlap, PupilMap, PupilPolarization};
use fourpi_core::coupling::{pupil_to_angular, spatial_overlap, truncated_dipole_amplitude};
use fourpi_core::temporal::excite;

fn angular_quadrature(c: &mut Criterion) {
    let mirror = deep_mirror();
    let domain = mirror.coverage_domain();
    c.bench_function("weighted_solid_angle_both_kinds", |b| {
        b.iter(|| {
            for kind in BOTH_KINDS {
                black_box(kind.weighted_solid_angle(black_box(&domain)));
            }
        })
    });
}

fn truncated_overlap(c: &mut Criterion) {
    let mirror = deep_mirror();
    let domain = mirror.coverage_domain();
    c.bench_function("truncated_dipole_spatial_overlap", |b| {
        b.iter(|| {
            let trunc = truncated_dipole_amplitude(fourpi_core::DipoleKind::LinearPi, &domain)
                .normalized()
                .expect("truncated dipole carries power");
            black_box(
                spatial_overlap(&trunc, fourpi_core::DipoleKind::LinearPi)
                    .expect("normalized input"),
            );
        })
    });
}

fn pupil_pipeline(c: &mut Criterion) {
    let mirror = deep_mirror();
    let profile =
        ideal_profile(fourpi_core::DipoleKind::LinearPi, &mirror, 2049).expect("profile samples");
    let pupil =
        PupilMap::flat(mirror.rim_radius(), 65, 32, PupilPolarization::Radial).expect("flat pupil");
    c.bench_function("pupil_to_angular_2049_samples", |b| {
        b.iter(|| {
            let field =
                pupil_to_angular(black_box(&profile), &pupil, &mirror).expect("matched aperture");
            black_box(
                spatial_overlap(&field, fourpi_core::DipoleKind::LinearPi)
                    .expect("normalized field"),
            );
        })
    });
}

fn lg_overlap(c: &mut Criterion) {
    let mirror = deep_mirror();
    c.bench_function("lg01_overlap_near_optimum", |b| {
        b.iter(|| black_box(lg01_overlap(&mirror, black_box(2.2757945599)).expect("valid waist")))
    });
}

fn excitation(c: &mut Criterion) {
    let atom = calcium_like_atom();
    let pulse = matched_rising_pulse();
    c.bench_function("excite_matched_rising", |b| {
        b.iter(|| black_box(excite(&atom, &pulse, black_box(1.0)).expect("valid pulse")))
    });
}

criterion_group!(
    benches,
    angular_quadrature,
    truncated_overlap,
    pupil_pipeline,
    lg_overlap,
    excitation
);
criterion_main!(benches);
