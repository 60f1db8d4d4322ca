use lamlab::circle::{arc_length, in_arc, sigma, sigma_iter, CirclePoint, Degree};
use lamlab::leaves::{is_critical, leaf_image, leaves_cross, sibling_collections, LeafImage};
use lamlab::rotation::{enumerate_rotational_orbits, major_length_bound_check, major_minor, unicritical_lamination};
use lamlab::Leaf;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn deg(d: u32) -> Degree {
    Degree::new(d).unwrap()
}

fn point() -> impl Strategy<Value = CirclePoint> {
    (0i64..720, 1i64..720).prop_map(|(n, m)| CirclePoint::frac(n, m))
}

fn leaf() -> impl Strategy<Value = Leaf> {
    (point(), point()).prop_filter("distinct endpoints", |(a, b)| a != b).prop_map(|(a, b)| Leaf::new(a, b).unwrap())
}

proptest! {
    #[test]
    fn iterating_sigma_multiplies(t in point(), d in 2u32..7, n in 0usize..6) {
        let v = t.value() * BigRational::from_integer(BigInt::from(d).pow(n as u32));
        let want = CirclePoint::new(&v - v.floor());
        prop_assert_eq!(sigma_iter(deg(d), &t, n), want);
    }

    #[test]
    fn serde_round_trip(t in point(), l in leaf()) {
        let s = serde_json::to_string(&t).unwrap();
        prop_assert_eq!(serde_json::from_str::<CirclePoint>(&s).unwrap(), t);
        let s = serde_json::to_string(&l).unwrap();
        prop_assert_eq!(serde_json::from_str::<Leaf>(&s).unwrap(), l);
    }

    #[test]
    fn arcs_split_the_circle(a in point(), b in point()) {
        prop_assume!(a != b);
        prop_assert_eq!(arc_length(&a, &b) + arc_length(&b, &a), BigRational::from_integer(1.into()));
    }

    #[test]
    fn crossing_means_separated_endpoints(a in leaf(), b in leaf()) {
        let shared = a.shares_endpoint(&b);
        let sep = |x: &Leaf, y: &Leaf| in_arc(y.lo(), x.lo(), x.hi()) != in_arc(y.hi(), x.lo(), x.hi());
        prop_assert_eq!(leaves_cross(&a, &b), !shared && sep(&a, &b));
    }

    #[test]
    fn siblings_share_an_image(l in leaf(), d in 2u32..5) {
        let dd = deg(d);
        prop_assume!(!is_critical(dd, &l));
        let img = leaf_image(dd, &l);
        for c in sibling_collections(dd, &l).unwrap() {
            prop_assert_eq!(c.leaves.len(), d as usize);
            prop_assert!(c.leaves.contains(&l));
            for x in &c.leaves {
                prop_assert_eq!(&leaf_image(dd, x), &img);
                for y in &c.leaves {
                    prop_assert!(x == y || (!x.shares_endpoint(y) && !leaves_cross(x, y)));
                }
            }
        }
    }

    #[test]
    fn leaf_image_maps_endpoints(l in leaf(), d in 2u32..7) {
        let dd = deg(d);
        let (a, b) = (sigma(dd, l.lo()), sigma(dd, l.hi()));
        match leaf_image(dd, &l) {
            LeafImage::Leaf(m) => prop_assert!(m.has_endpoint(&a) && m.has_endpoint(&b)),
            LeafImage::Degenerate(p) => prop_assert!(a == p && b == p),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unicritical_laminations_are_prelaminations(d in 2u32..5, period in 2usize..4, pick in 0usize..64) {
        let dd = deg(d);
        let orbits: Vec<_> = enumerate_rotational_orbits(dd, period, None)
            .into_iter()
            .filter(|o| o.is_unicritical())
            .collect();
        prop_assume!(!orbits.is_empty());
        let o = &orbits[pick % orbits.len()];
        let st = unicritical_lamination(o, 2).unwrap();
        prop_assert!(st.last().is_prelamination());
        let mm = major_minor(dd, &o.sides()).unwrap();
        prop_assert!(major_length_bound_check(dd, &mm.major));
    }
}
