//! Shared generators for the integration suites: seeded random triplets and
//! random valid walk kernels.
#![allow(dead_code)] // each test target uses a subset

use rand::rngs::StdRng;
use rand::Rng;

use mmrw::{build_three_queue, mean_drift, stationary_distribution, MmrwModel, PhaseMatrix, QueueRates};

pub fn three_queue(lambda3: f64) -> MmrwModel {
    build_three_queue(&QueueRates::new([0.1, 0.2, lambda3], [1.0, 1.0, 1.0]).unwrap()).unwrap()
}

/// Random irreducible substochastic triplet with strictly negative drift:
/// positive entries, rows of the member sum normalized to one, members
/// swapped if the drift comes out upward, then scaled below one.
pub type TripletMatrices = (PhaseMatrix, PhaseMatrix, PhaseMatrix);

pub fn random_negative_drift_triplet(rng: &mut StdRng, dim: usize, beta: f64) -> TripletMatrices {
    loop {
        let mut raw = [(); 3].map(|_| {
            (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(0.01..1.0)).collect::<Vec<f64>>())
                .collect::<Vec<_>>()
        });
        for i in 0..dim {
            let s: f64 = raw.iter().map(|m| m[i].iter().sum::<f64>()).sum();
            for m in raw.iter_mut() {
                for v in m[i].iter_mut() {
                    *v /= s;
                }
            }
        }
        let [am1, a0, a1] = raw;
        let am1 = PhaseMatrix::new(&am1).unwrap();
        let a0 = PhaseMatrix::new(&a0).unwrap();
        let a1 = PhaseMatrix::new(&a1).unwrap();
        let a_star = am1.add(&a0).add(&a1);
        let pi = stationary_distribution(&a_star, 1e-9).unwrap();
        let up: f64 = pi
            .iter()
            .zip(a1.row_sums())
            .map(|(p, r)| p * r)
            .sum();
        let down: f64 = pi
            .iter()
            .zip(am1.row_sums())
            .map(|(p, r)| p * r)
            .sum();
        let drift = up - down;
        if drift.abs() < 0.02 {
            continue;
        }
        let (am1, a1) = if drift < 0.0 { (am1, a1) } else { (a1, am1) };
        return (
            am1.scaled(beta).unwrap(),
            a0.scaled(beta).unwrap(),
            a1.scaled(beta).unwrap(),
        );
    }
}

/// Random stochastic 3-D kernel with every block positive and all drift
/// components strictly negative (coordinates with upward drift are mirrored).
type RawBlocks = Vec<((i8, i8, i8), Vec<Vec<f64>>)>;

pub fn random_valid_model(rng: &mut StdRng, s0: usize) -> MmrwModel {
    loop {
        let mut blocks: RawBlocks = Vec::new();
        for k1 in -1i8..=1 {
            for k2 in -1i8..=1 {
                for k3 in -1i8..=1 {
                    let m = (0..s0)
                        .map(|_| (0..s0).map(|_| rng.gen_range(0.01..1.0)).collect::<Vec<f64>>())
                        .collect::<Vec<_>>();
                    blocks.push(((k1, k2, k3), m));
                }
            }
        }
        for i in 0..s0 {
            let s: f64 = blocks.iter().map(|(_, m)| m[i].iter().sum::<f64>()).sum();
            for (_, m) in blocks.iter_mut() {
                for v in m[i].iter_mut() {
                    *v /= s;
                }
            }
        }
        let model = MmrwModel::new(
            s0,
            blocks
                .iter()
                .map(|(k, m)| (*k, PhaseMatrix::new(m).unwrap())),
            None,
        )
        .unwrap();
        let drift = mean_drift(&model).unwrap();
        if drift.iter().any(|a| a.abs() < 5e-3) {
            continue;
        }
        // Mirror coordinates with upward drift; this flips the drift sign and
        // keeps the kernel stochastic.
        let flip: Vec<bool> = drift.iter().map(|&a| a > 0.0).collect();
        if flip.iter().any(|&f| f) {
            let mirrored = MmrwModel::new(
                s0,
                model.blocks().map(|(k, m)| {
                    let ks = [k.0, k.1, k.2];
                    let nk: Vec<i8> = ks
                        .iter()
                        .enumerate()
                        .map(|(c, &v)| if flip[c] { -v } else { v })
                        .collect();
                    ((nk[0], nk[1], nk[2]), m.clone())
                }),
                None,
            )
            .unwrap();
            return mirrored;
        }
        return model;
    }
}
