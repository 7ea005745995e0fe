use nalgebra::DVector;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use super::ConeGenerators;

/// Random polling set drawn from a tangent cone.
///
/// The lineality space contributes one uniformly random unit direction `v`
/// and its negative; `ceil(count_fraction * |pointed|)` pointed generators are
/// sampled without replacement. The result is shuffled. An empty cone yields
/// an empty set.
pub fn sample_polling_directions<R: Rng + ?Sized>(
    cone: &ConeGenerators,
    count_fraction: f64,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    if let Some(first) = cone.lineality.first() {
        let dim = first.len();
        loop {
            let mut v = DVector::<f64>::zeros(dim);
            for basis in &cone.lineality {
                let g: f64 = rng.sample(StandardNormal);
                v += basis * g;
            }
            let norm = v.norm();
            if norm > 1e-12 {
                v /= norm;
                out.push(-&v);
                out.push(v);
                break;
            }
        }
    }
    let total = cone.pointed.len();
    if total > 0 {
        let fraction = count_fraction.clamp(f64::MIN_POSITIVE, 1.0);
        let count = ((fraction * total as f64) - 1e-12).ceil().clamp(1.0, total as f64) as usize;
        for i in index::sample(rng, total, count) {
            out.push(cone.pointed[i].clone());
        }
    }
    out.shuffle(rng);
    out
}
