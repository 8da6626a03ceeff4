/// Anything that can be viewed as a flat real parameter vector.
pub trait Parameters {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64]));
    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn sq_norm(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each_slice(&mut |s| acc += s.iter().map(|v| v * v).sum::<f64>());
        acc
    }

    fn norm(&self) -> f64 {
        libm::sqrt(self.sq_norm())
    }

    fn scale(&mut self, k: f64) {
        self.for_each_slice_mut(&mut |s| s.iter_mut().for_each(|v| *v *= k));
    }

    fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_slice(&mut |s| ok &= s.iter().all(|v| v.is_finite()));
        ok
    }
}

/// Euclidean projection onto the ball of the given radius, in place.
pub fn project_in_place<P: Parameters + ?Sized>(params: &mut P, radius: f64) {
    debug_assert!(radius > 0.0);
    let norm = params.norm();
    if norm > radius {
        params.scale(radius / norm);
    }
}

/// Euclidean projection onto the ball of the given radius.
pub fn project_params<P: Parameters + Clone>(params: &P, radius: f64) -> P {
    let mut out = params.clone();
    project_in_place(&mut out, radius);
    out
}

/// Rescales so the norm is at most `max_norm`. Returns the pre-clip norm.
pub fn clip_norm<P: Parameters + ?Sized>(params: &mut P, max_norm: f64) -> f64 {
    let norm = params.norm();
    if norm > max_norm {
        params.scale(max_norm / norm);
    }
    norm
}

impl Parameters for [f64] {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(self);
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self);
    }
}

impl Parameters for alloc::vec::Vec<f64> {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(self);
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn interior_point_unchanged() {
        let x = vec![3.0, 0.0];
        assert_eq!(project_params(&x, 10.0), x);
    }

    #[test]
    fn exterior_point_scaled_radially() {
        let x = vec![12.0, 16.0]; // norm 20
        assert_eq!(project_params(&x, 10.0), vec![6.0, 8.0]);
    }

    proptest! {
        #[test]
        fn projection_is_bounded_and_idempotent(
            x in proptest::collection::vec(-100.0f64..100.0, 1..40),
            r in 0.01f64..50.0,
        ) {
            let p = project_params(&x, r);
            prop_assert!(p.norm() <= r + 1e-12);
            let pp = project_params(&p, r);
            let diff: Vec<f64> = p.iter().zip(&pp).map(|(a, b)| a - b).collect();
            prop_assert!(diff.norm() <= 1e-12 * r.max(1.0));
            if x.norm() <= r {
                prop_assert_eq!(p, x);
            }
        }
    }
}
