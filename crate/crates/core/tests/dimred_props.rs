mod common;

use common::{gaussian_vector, rng};
use hypercsi::dimred::{fit_affine_set, lift, project};
use hypercsi::synth::{generate_scene, sample_dirichlet, SceneSpec, SpectraSource};
use hypercsi::SpectralDataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

// mixtures of n random spectra: data lying exactly in an (n-1)-dim affine set
fn mixed_data(m: usize, n: usize, l: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut r = rng(seed);
    let a = DMatrix::from_columns(&(0..n).map(|_| gaussian_vector(m, &mut r).map(|x| x.abs() + 0.1)).collect::<Vec<_>>());
    let s = sample_dirichlet(&vec![1.0; n], l, &mut r).unwrap();
    (&a * s, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn basis_is_orthonormal_and_fits_noiseless_data(m in 6usize..40, n in 2usize..6, seed in any::<u64>()) {
        let (x, _) = mixed_data(m, n, 60, seed);
        let data = SpectralDataset::new(x.clone());
        let model = fit_affine_set(&data, n).unwrap();
        let gram = model.basis.transpose() * &model.basis;
        prop_assert!((gram - DMatrix::identity(n - 1, n - 1)).amax() < 1e-10);

        let dr = project(&data, &model).unwrap();
        prop_assert!(dr.pixels.column_mean().amax() < 1e-8);
        let points: Vec<DVector<f64>> = (0..dr.len()).map(|k| dr.pixel(k)).collect();
        let lifted = lift(&points, &model).unwrap();
        for (k, p) in lifted.iter().enumerate() {
            let orig = x.column(k);
            prop_assert!((p - orig).amax() <= 1e-8 * orig.amax());
        }
    }

    #[test]
    fn subspace_agrees_with_svd(m in 6usize..40, n in 2usize..6, seed in any::<u64>()) {
        let (x, _) = mixed_data(m, n, 80, seed);
        let data = SpectralDataset::new(x.clone());
        let model = fit_affine_set(&data, n).unwrap();
        let mut centered = x.clone();
        let mean = x.column_mean();
        for mut c in centered.column_iter_mut() {
            c -= &mean;
        }
        prop_assert!((&model.mean - &mean).amax() < 1e-13);
        // independent route: left singular vectors of the centered data
        let svd = centered.clone().svd(true, false);
        let u = svd.u.unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let top = DMatrix::from_columns(&order[..n - 1].iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
        let p_ours = &model.basis * model.basis.transpose();
        let p_svd = &top * top.transpose();
        prop_assert!((p_ours - p_svd).amax() < 1e-9);
        let residual = (DMatrix::identity(m, m) - &model.basis * model.basis.transpose()) * &centered;
        for c in residual.column_iter() {
            prop_assert!(c.norm() < 1e-9);
        }
    }

    #[test]
    fn projection_is_an_isometry_on_the_affine_set(seed in any::<u64>()) {
        let (x, _) = mixed_data(30, 4, 50, seed);
        let data = SpectralDataset::new(x.clone());
        let model = fit_affine_set(&data, 4).unwrap();
        let dr = project(&data, &model).unwrap();
        for (a, b) in [(0usize, 1usize), (2, 17), (5, 49)] {
            let d_full = (x.column(a) - x.column(b)).norm();
            let d_dr = (dr.pixel(a) - dr.pixel(b)).norm();
            prop_assert!((d_full - d_dr).abs() < 1e-9);
        }
    }
}

#[test]
fn fits_are_bit_identical() {
    let (x, _) = mixed_data(50, 5, 300, 9);
    let data = SpectralDataset::new(x);
    let a = fit_affine_set(&data, 5).unwrap();
    let b = fit_affine_set(&data, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lifting_true_endmembers_restores_spectra() {
    let spec = SceneSpec::new(60, 500, 4, 3);
    let truth = generate_scene(&spec, &SpectraSource::RandomSmooth).unwrap();
    let data = SpectralDataset::new(truth.observed.clone());
    let model = fit_affine_set(&data, 4).unwrap();
    let dr_truth = project(&SpectralDataset::new(truth.spectra.clone()), &model).unwrap();
    let points: Vec<DVector<f64>> = (0..4).map(|k| dr_truth.pixel(k)).collect();
    let lifted = lift(&points, &model).unwrap();
    for (k, p) in lifted.iter().enumerate() {
        assert!((p - truth.spectra.column(k)).amax() < 1e-8);
    }
}
