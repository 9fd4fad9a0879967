use isoform::distributions::{dist_a_dn, gen_poly, moment_finite, moment_limit};
use isoform::enumeration::isotropic_lines;
use isoform::qspace::{make_hyperbolic, push_mis, subquotient, QuadraticSpace};
use isoform::rng::RngStream;
use isoform::sampler::sample_mis_uniform;
use isoform::{FpVec, Subspace};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// A random `F_p`-valued form: diagonal values and an upper triangle of pairings.
fn space_strategy() -> impl Strategy<Value = QuadraticSpace> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 1usize..6).prop_flat_map(|(p, dim)| {
        let cells = dim * (dim - 1) / 2;
        (
            Just(p),
            prop::collection::vec(0..p as u32, dim),
            prop::collection::vec(0..p as u32, cells),
        )
            .prop_map(move |(p, q, upper)| {
                let mut pairing = vec![vec![0u32; dim]; dim];
                let mut k = 0;
                for i in 0..dim {
                    pairing[i][i] = (2 * q[i]) % p as u32;
                    for j in i + 1..dim {
                        pairing[i][j] = upper[k];
                        pairing[j][i] = upper[k];
                        k += 1;
                    }
                }
                QuadraticSpace::new(p, 1, q, pairing).unwrap()
            })
    })
}

fn vector(p: u8, coords: &[u8]) -> FpVec {
    FpVec::from_coords(p, &coords.iter().map(|&c| c as i64).collect::<Vec<_>>())
}

proptest! {
    #[test]
    fn form_axioms(space in space_strategy(), seed in any::<u64>(), a in 0u8..7) {
        let (p, dim) = (space.prime(), space.dim());
        let mut rng = RngStream::new(seed, 0);
        let mut draw = || {
            let c: Vec<u8> = (0..dim).map(|_| rng.uniform_below(p as u64) as u8).collect();
            vector(p, &c)
        };
        let (x, y, z) = (draw(), draw(), draw());
        let a = a % p;
        let q = |v: &FpVec| space.eval_q(v).unwrap();
        let b = |u: &FpVec, v: &FpVec| space.pairing(u, v).unwrap();
        let mut sum = x.clone();
        sum.add(&y);
        prop_assert_eq!(q(&sum) - q(&x) - q(&y), b(&x, &y));
        prop_assert_eq!(b(&x, &y), b(&y, &x));
        let mut combo = x.scaled(a);
        combo.add(&y);
        prop_assert_eq!(b(&combo, &z), b(&x, &z).times(a as i64) + b(&y, &z));
        prop_assert_eq!(q(&x.scaled(a)), q(&x).times((a as i64) * (a as i64)));
    }

    #[test]
    fn perp_is_an_involution(space in space_strategy(), seed in any::<u64>(), k in 0usize..4) {
        prop_assume!(space.is_nondegenerate());
        let (p, dim) = (space.prime(), space.dim());
        let mut rng = RngStream::new(seed, 1);
        let rows = (0..k.min(dim)).map(|_| {
            let c: Vec<u8> = (0..dim).map(|_| rng.uniform_below(p as u64) as u8).collect();
            vector(p, &c)
        });
        let s = Subspace::span(p, dim, rows).unwrap();
        let perp = space.perp(&s).unwrap();
        prop_assert_eq!(s.dim() + perp.dim(), dim);
        prop_assert_eq!(space.perp(&perp).unwrap(), s);
    }

    #[test]
    fn finite_laws_are_distributions(p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 101]), n in 0u32..12) {
        let law = dist_a_dn(p, n).unwrap().probs_exact.unwrap();
        let total: BigRational = law.iter().cloned().sum();
        prop_assert_eq!(total, BigRational::one());
        prop_assert!(law.iter().all(|a| *a > BigRational::zero()));
        if n > 0 {
            prop_assert!(gen_poly(p, n).unwrap().eval(&-BigRational::one()).is_zero());
        }
    }

    #[test]
    fn finite_moments_increase_to_the_limit(p in prop::sample::select(vec![2u64, 3, 5]), n in 1u32..10, m in 1u32..4) {
        let a = moment_finite(p, n, m).unwrap();
        let b = moment_finite(p, n + 1, m).unwrap();
        let limit = BigRational::from_integer(moment_limit(p, m).unwrap().into());
        prop_assert!(a < b);
        prop_assert!(b < limit);
    }

    #[test]
    fn samples_and_pushes_stay_maximal(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1usize..4, seed in any::<u64>()) {
        let space = make_hyperbolic(p, n).unwrap();
        let mut rng = RngStream::new(seed, 2);
        let z = sample_mis_uniform(&space, &mut rng).unwrap();
        prop_assert!(space.is_maximal_isotropic(&z).unwrap());
        let lines = isotropic_lines(&space);
        let x = &lines[rng.uniform_below(lines.len() as u64) as usize];
        let pushed = push_mis(&space, x, &z).unwrap();
        let sub = subquotient(&space, x).unwrap();
        prop_assert!(sub.space().is_maximal_isotropic(&pushed).unwrap());
    }
}
