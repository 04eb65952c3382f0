use mfhh_core::rational::q;
use mfhh_core::superlin::*;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn perm(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle()
}

fn degrees_and_perms() -> impl Strategy<Value = (Vec<Parity>, Vec<usize>, Vec<usize>)> {
    (1usize..7).prop_flat_map(|k| (proptest::collection::vec(0u8..2, k), perm(k), perm(k)))
}

/// Brute-force sign: bubble sort the permuted sequence back, one adjacent
/// swap at a time.
fn bubble_sign(degrees: &[Parity], p: &[usize]) -> i8 {
    let mut seq = p.to_vec();
    let mut s = 1i8;
    for i in 0..seq.len() {
        for j in 0..seq.len() - 1 - i {
            if seq[j] > seq[j + 1] {
                if degrees[seq[j]] == 0 && degrees[seq[j + 1]] == 0 {
                    s = -s;
                }
                seq.swap(j, j + 1);
            }
        }
    }
    s
}

proptest! {
    #[test]
    fn koszul_sign_is_a_homomorphism((d, p, r) in degrees_and_perms()) {
        let composite: Vec<usize> = r.iter().map(|&j| p[j]).collect();
        let permuted: Vec<Parity> = p.iter().map(|&i| d[i]).collect();
        prop_assert_eq!(
            koszul_sign(&d, &composite),
            koszul_sign(&d, &p) * koszul_sign(&permuted, &r)
        );
    }

    #[test]
    fn koszul_sign_matches_bubble_sort((d, p, _r) in degrees_and_perms()) {
        prop_assert_eq!(koszul_sign(&d, &p), bubble_sign(&d, &p));
    }

    #[test]
    fn permuted_evaluation_carries_koszul_sign(
        entries in subsequence((0..27usize).collect::<Vec<_>>(), 0..10),
        p in perm(3),
        r in perm(3),
    ) {
        let a = SuperSpace::from_pairs(&[("e", 0), ("o", 1), ("f", 0)]);
        let mut f = SuperMap::zero(3, a.clone(), a.clone(), 1);
        for e in entries {
            let t = vec![e / 9, (e / 3) % 3, e % 3];
            let out = if (1 + a.tuple_parity(&t)) % 2 == 1 { 1 } else { 0 };
            f.add_entry(t, out, q(e as i64 + 1)).unwrap();
        }
        let g = f.permute_inputs(&p);
        for t in a.tuples(3) {
            let moved: Vec<usize> = p.iter().map(|&i| t[i]).collect();
            let ds: Vec<Parity> = t.iter().map(|&i| a.parity(i)).collect();
            let s = q(koszul_sign(&ds, &p) as i64);
            let want: std::collections::BTreeMap<_, _> =
                f.apply(&moved).unwrap().into_iter().map(|(k, c)| (k, c * &s)).collect();
            prop_assert_eq!(g.apply(&t).unwrap(), want);
        }
        let composite: Vec<usize> = r.iter().map(|&j| p[j]).collect();
        prop_assert_eq!(f.permute_inputs(&r).permute_inputs(&p), f.permute_inputs(&composite));
        let (rank, ker) = rank_kernel(&[f.clone()]);
        prop_assert_eq!(rank + ker.len(), 27);
    }
}
