//! Instances shared by the benchmarks.

use pf_lattice::commutant::{sample_semi_commuting, Side};
use pf_lattice::verify::{peripheral_instance, random_irreducible, random_reducible};
use pf_lattice::{PosMatrix, Tolerances};

pub const SIZES: [usize; 4] = [4, 8, 16, 32];

pub fn dense_irreducible(n: usize) -> PosMatrix {
    random_irreducible(n, 0.5, n as u64)
}

pub fn cyclic_peripheral(n: usize) -> PosMatrix {
    peripheral_instance(n, true, n as u64).k
}

pub fn reducible(n: usize) -> PosMatrix {
    random_reducible(n, n as u64)
}

/// `(T, K)` with `T` drawn from the super right commutant of a reducible `K`.
pub fn semi_commuting_pair(n: usize) -> (PosMatrix, PosMatrix) {
    let k = reducible(n);
    let sample = sample_semi_commuting(&k, Side::Right, 7, 6, &Tolerances::default())
        .expect("sampling succeeds on generated instances");
    (
        sample
            .matrices
            .last()
            .expect("sample holds I and K")
            .clone(),
        k,
    )
}
