use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigen::jacobi_eigen;
use crate::functional::FunctionalContext;
use crate::sequence::PeriodicSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MorseInfo {
    /// Eigenvalues of the Hessian below `−band`.
    pub index: usize,
    /// Eigenvalues inside `[−band, band]`.
    pub near_null: usize,
    /// The Hessian straddled a `|t|^β` kink; the band was widened to the
    /// estimated stencil error.
    pub caveat: bool,
}

pub fn count_negative(hessian: &DMatrix<f64>, band: f64) -> (usize, usize) {
    let eig = jacobi_eigen(hessian);
    let index = eig.values.iter().filter(|&&v| v < -band).count();
    let near_null = eig.values.iter().filter(|&&v| v.abs() <= band).count();
    (index, near_null)
}

/// Morse index of `I` at `u` from the finite-difference Hessian.
pub fn morse_index(u: &PeriodicSequence, ctx: &FunctionalContext) -> MorseInfo {
    let rep = ctx.i_hessian(u);
    let (index, near_null) = count_negative(&rep.matrix, rep.null_band());
    MorseInfo {
        index,
        near_null,
        caveat: !rep.accurate(),
    }
}
