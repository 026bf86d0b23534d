use rand::seq::SliceRandom;
use rand::Rng;

/// Latin-hypercube sample of `n` points in `[0, 1)^dim`: each axis is cut
/// into `n` strata and every stratum holds exactly one point.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            point[d] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = latin_hypercube(7, 3, &mut rng);
        assert_eq!(pts.len(), 7);
        for d in 0..3 {
            let mut bins: Vec<usize> = pts.iter().map(|p| (p[d] * 7.0).floor() as usize).collect();
            bins.sort();
            assert_eq!(bins, (0..7).collect::<Vec<_>>());
        }
    }
}
