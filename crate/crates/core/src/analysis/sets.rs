use std::collections::BTreeSet;

/// Inclusion-minimal members, deduplicated, in first-seen order.
pub fn minimal_sets<T: Ord + Clone>(sets: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let mut out: Vec<BTreeSet<T>> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if out.contains(s) {
            continue;
        }
        let dominated = sets
            .iter()
            .enumerate()
            .any(|(j, t)| j != i && t.len() < s.len() && t.is_subset(s));
        if !dominated {
            out.push(s.clone());
        }
    }
    out
}

/// All inclusion-minimal hitting sets, by branch and bound on the first
/// unhit set.
pub fn minimal_hitting_sets<T: Ord + Clone>(sets: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    if sets.iter().any(BTreeSet::is_empty) {
        return Vec::new();
    }
    let family = minimal_sets(sets);
    let mut found: Vec<BTreeSet<T>> = Vec::new();
    let mut current = BTreeSet::new();
    branch(&family, &mut current, &mut found);
    let mut minimal = minimal_sets(&found);
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal
}

fn branch<T: Ord + Clone>(family: &[BTreeSet<T>], current: &mut BTreeSet<T>, found: &mut Vec<BTreeSet<T>>) {
    // a superset of a known hitting set cannot be minimal
    if found.iter().any(|f| f.is_subset(current)) {
        return;
    }
    let Some(unhit) = family.iter().find(|s| s.is_disjoint(current)) else {
        found.push(current.clone());
        return;
    };
    for x in unhit {
        current.insert(x.clone());
        branch(family, current, found);
        current.remove(x);
    }
}
