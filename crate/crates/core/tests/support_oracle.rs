//! The window walk against the finite intersection of dilated periodic
//! extensions, and the tree rebuilt from a support.

use vilenkin::tree::fixtures::fig1;
use vilenkin::{
    allowed_windows, enumerate_nvalid, support_set, support_set_bruteforce, tree_from_support, Mask,
};

fn agree(p: u32, n: u32) -> usize {
    let mut count = 0;
    for t in enumerate_nvalid(p, n, None).unwrap() {
        let mask = Mask::from_tree(&t, None).unwrap();
        let walk = support_set(&mask).unwrap();
        let brute = support_set_bruteforce(&mask, walk.m()).unwrap();
        assert_eq!(walk, brute, "tree {}", t.to_json());
        assert_eq!(walk.m() as usize, t.height() - 2 * n as usize);
        count += 1;
    }
    count
}

#[test]
fn fig1_walk_equals_intersection() {
    let mask = Mask::from_tree(&fig1(), None).unwrap();
    assert_eq!(
        support_set(&mask).unwrap(),
        support_set_bruteforce(&mask, 2).unwrap()
    );
}

#[test]
fn walk_equals_intersection_for_small_trees() {
    for (p, n) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        assert!(agree(p, n) > 0);
    }
}

#[test]
fn walk_equals_intersection_at_depth_three() {
    assert!(agree(2, 3) > 0);
}

#[test]
fn support_rebuilds_the_tree() {
    for (p, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        for t in enumerate_nvalid(p, n, None).unwrap() {
            let w = allowed_windows(&t).unwrap();
            let back = tree_from_support(&w, p, n).unwrap();
            assert_eq!(allowed_windows(&back).unwrap(), w);
            assert_eq!(back, t, "canonical forms differ");
        }
    }
}
