use capdispenser::model::{Binding, ComponentValue, ModelError, SymbolicScalar, TimeDuration};
use capdispenser::{AnnotatedGraph, BeMap, Box3D, ComponentId, EdgeAnn};
use proptest::prelude::*;

fn cid(s: &str) -> ComponentId {
    ComponentId::new(s).unwrap()
}

fn small_box() -> impl Strategy<Value = Box3D> {
    (0i64..8, 0i64..8, 0i64..8, 0i64..5, 0i64..5, 0i64..5)
        .prop_map(|(x, y, z, w, d, h)| Box3D::from_anchor(x, y, z, w, d, h).unwrap())
}

/// Unit cells inside both boxes, counted one by one.
fn cells_in_both(a: &Box3D, b: &Box3D) -> i64 {
    let inside = |bx: &Box3D, x: i64, y: i64, z: i64| {
        let (lo, hi) = (bx.min_corner(), bx.max_corner());
        lo.0 <= x && x < hi.0 && lo.1 <= y && y < hi.1 && lo.2 <= z && z < hi.2
    };
    let mut n = 0;
    for x in 0..14 {
        for y in 0..14 {
            for z in 0..14 {
                if inside(a, x, y, z) && inside(b, x, y, z) {
                    n += 1;
                }
            }
        }
    }
    n
}

proptest! {
    #[test]
    fn bemap_lookup_and_serde(entries in prop::collection::btree_map("[a-z]{1,6}", any::<i64>(), 0..10)) {
        let pairs: Vec<_> = entries.iter().map(|(k, v)| (cid(k), ComponentValue::Int(*v))).collect();
        let map = BeMap::new(pairs.clone()).unwrap();
        prop_assert_eq!(map.len(), entries.len());
        for (k, v) in &entries {
            prop_assert_eq!(map.get(&cid(k)), Some(&ComponentValue::Int(*v)));
        }
        let back: BeMap = serde_json::from_str(&serde_json::to_string(&map).unwrap()).unwrap();
        prop_assert_eq!(&back, &map);
        if let Some((k, _)) = pairs.first().cloned() {
            let mut dup = pairs.clone();
            dup.push((k.clone(), ComponentValue::str("again")));
            prop_assert_eq!(BeMap::new(dup), Err(ModelError::DuplicateKey(k)));
        }
    }

    #[test]
    fn overlap_matches_cell_count(a in small_box(), b in small_box()) {
        let cells = cells_in_both(&a, &b);
        prop_assert_eq!(a.overlaps(&b), b.overlaps(&a));
        prop_assert_eq!(a.overlaps(&b), cells > 0);
        prop_assert_eq!(a.shared_volume(&b), cells);
        prop_assert_eq!(a.overlaps(&a), a.volume() > 0);
        if a.overlaps(&b) {
            prop_assert!(a.intersection(&b).unwrap().volume() > 0);
        }
    }

    #[test]
    fn touching_faces_do_not_overlap(a in small_box(), axis in 0usize..3) {
        let (lo, hi) = (a.min_corner(), a.max_corner());
        let (w, d, h) = (hi.0 - lo.0, hi.1 - lo.1, hi.2 - lo.2);
        let next = match axis {
            0 => Box3D::from_anchor(hi.0, lo.1, lo.2, 3, d, h),
            1 => Box3D::from_anchor(lo.0, hi.1, lo.2, w, 3, h),
            _ => Box3D::from_anchor(lo.0, lo.1, hi.2, w, d, 3),
        }.unwrap();
        prop_assert!(!a.overlaps(&next));
        prop_assert_eq!(a.shared_volume(&next), 0);
    }

    #[test]
    fn anchored_volume(x in -50i64..50, y in -50i64..50, z in -50i64..50, w in 0i64..40, d in 0i64..40, h in 0i64..40) {
        let b = Box3D::from_anchor(x, y, z, w, d, h).unwrap();
        prop_assert_eq!(b.volume(), w * d * h);
        prop_assert_eq!(b, Box3D::new(x + w, y + d, z + h, x, y, z));
        prop_assert!(Box3D::from_anchor(x, y, z, -1 - w, d, h).is_err());
    }

    #[test]
    fn box_serde(a in small_box()) {
        let back: Box3D = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn addition_sums(consts in prop::collection::vec(-1000i64..1000, 0..5), vars in prop::collection::vec((0usize..3, -1000i64..1000), 0..5)) {
        let names = ["Active", "Passive", "Obstructed"];
        let binding: Binding = names.iter().enumerate().map(|(i, n)| (n.to_string(), i as i64 * 17 - 5)).collect();
        let mut ops: Vec<SymbolicScalar> = consts.iter().map(|c| SymbolicScalar::Constant(*c)).collect();
        ops.extend(vars.iter().map(|(i, _)| SymbolicScalar::Variable(names[*i].into())));
        let mut naive: i64 = consts.iter().sum();
        for (i, _) in &vars {
            naive += binding[names[*i]];
        }
        match SymbolicScalar::sum(ops.clone()) {
            Ok(s) => prop_assert_eq!(s.eval(&binding).unwrap(), naive),
            Err(e) => {
                prop_assert!(ops.len() < 2);
                prop_assert!(matches!(e, ModelError::TooFewTerms(..)), "unexpected {:?}", e);
            }
        }
    }

    #[test]
    fn duration_is_translation_invariant(delta in -5000i64..5000, t in -1_000_000i64..1_000_000) {
        let d = TimeDuration::offset_from("Active", delta);
        let binding: Binding = [("Active".to_string(), t)].into();
        prop_assert_eq!(d.value(&binding).unwrap(), delta);
        prop_assert!(d.value(&Binding::new()).is_err());
    }

    #[test]
    fn graph_nodes_bounded(edges in prop::collection::btree_set((0u8..6, 0u8..6), 0..20)) {
        let list: Vec<_> = edges.iter().map(|(a, b)| EdgeAnn::plain(cid(&format!("n{a}")), cid(&format!("n{b}")))).collect();
        let g = AnnotatedGraph::new(list.clone()).unwrap();
        prop_assert!(g.nodes().len() <= 2 * g.len());
        let back: AnnotatedGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
        if let Some(e) = list.first() {
            prop_assert!(AnnotatedGraph::new(vec![e.clone(), e.clone()]).is_err());
        }
    }
}

#[test]
fn elon_lives_on_mars() {
    let m = BeMap::new(vec![
        (cid("Name"), ComponentValue::str("Elon Musk")),
        (cid("Address"), ComponentValue::str("Mars")),
    ])
    .unwrap();
    assert_eq!(m.get(&cid("Address")).and_then(|v| v.as_str()), Some("Mars"));
    let again = BeMap::new(vec![
        (cid("Address"), ComponentValue::str("Mars")),
        (cid("Address"), ComponentValue::str("Earth")),
    ]);
    assert_eq!(again, Err(ModelError::DuplicateKey(cid("Address"))));
}
