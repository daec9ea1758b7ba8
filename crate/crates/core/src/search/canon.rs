//! Minimum-image canonical forms of set families under relabelling.
//!
//! A family is compared as its ascending list of bitmask codes; the canonical
//! form is the lexicographically smallest such list over all permutations of
//! the support. Labels are assigned `0, 1, 2, ...` one at a time; once labels
//! `0..j` are placed, every member inside them has a code below `2^j` and its
//! image is final, so partial images can be compared group by group.

use std::cmp::Ordering;

use crate::setcore::SetWord;

struct Index {
    vertices: Vec<usize>,
    /// member indices containing each vertex, keyed by vertex label
    incident: Vec<Vec<usize>>,
}

impl Index {
    fn new(members: &[SetWord], support: SetWord) -> Self {
        let top = support.max_element().map_or(0, |e| e + 1);
        let mut incident = vec![Vec::new(); top];
        for (i, m) in members.iter().enumerate() {
            for e in m.iter() {
                incident[e].push(i);
            }
        }
        Index { vertices: support.elements(), incident }
    }
}

/// Compares one label group of a candidate image against the reference.
/// Later elements of either list are all larger than anything in a group.
fn compare_group(image: &[SetWord], reference: &[SetWord]) -> Ordering {
    for (a, b) in image.iter().zip(reference) {
        match a.cmp(b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    // a longer group puts a small code where the other list has a larger one
    reference.len().cmp(&image.len())
}

/// Groups an ascending code list by the position of its top bit.
fn groups_by_top(members: &[SetWord], m: usize) -> Vec<Vec<SetWord>> {
    let mut groups = vec![Vec::new(); m.max(1)];
    for &x in members {
        match x.max_element() {
            Some(top) if top < m => groups[top].push(x),
            Some(_) => {}
            None => groups[0].push(x),
        }
    }
    groups
}

struct Walker<'a> {
    members: &'a [SetWord],
    index: Index,
    label_of: Vec<usize>,
    order: Vec<usize>,
    placed: SetWord,
    empty_member: bool,
}

impl<'a> Walker<'a> {
    fn new(members: &'a [SetWord], support: SetWord) -> Self {
        let index = Index::new(members, support);
        let top = index.incident.len();
        Walker {
            members,
            index,
            label_of: vec![usize::MAX; top],
            order: Vec::new(),
            placed: SetWord::EMPTY,
            empty_member: members.first().is_some_and(|m| m.is_empty()),
        }
    }

    /// Image codes of members completed by placing `v` at label `j`.
    fn group_for(&self, v: usize, j: usize) -> Vec<SetWord> {
        let within = self.placed.union(SetWord::singleton(v));
        let mut out: Vec<SetWord> = self.index.incident[v]
            .iter()
            .map(|&i| self.members[i])
            .filter(|m| m.is_subset(within))
            .map(|m| {
                let mut bits = 1u128 << j;
                for e in m.iter() {
                    if e != v {
                        bits |= 1u128 << self.label_of[e];
                    }
                }
                SetWord(bits)
            })
            .collect();
        if j == 0 && self.empty_member {
            out.insert(0, SetWord::EMPTY);
        }
        out.sort_unstable();
        out
    }

    fn place(&mut self, v: usize, j: usize) {
        self.label_of[v] = j;
        self.order.push(v);
        self.placed = self.placed.union(SetWord::singleton(v));
    }

    fn unplace(&mut self, v: usize) {
        self.label_of[v] = usize::MAX;
        self.order.pop();
        self.placed = self.placed.difference(SetWord::singleton(v));
    }
}

/// Whether an ascending family with support exactly `[m]` is already its own
/// minimum image. A family whose support is not an initial segment is never
/// canonical.
pub fn is_canonical(members: &[SetWord], m: usize) -> bool {
    let support = members.iter().fold(SetWord::EMPTY, |acc, &x| acc.union(x));
    if support != SetWord::full(m) {
        return false;
    }
    let reference = groups_by_top(members, m);
    let mut walker = Walker::new(members, support);
    !finds_smaller(&mut walker, &reference, 0, m)
}

fn finds_smaller(w: &mut Walker<'_>, reference: &[Vec<SetWord>], j: usize, m: usize) -> bool {
    if j == m {
        return false;
    }
    for vi in 0..w.index.vertices.len() {
        let v = w.index.vertices[vi];
        if w.placed.contains(v) {
            continue;
        }
        let group = w.group_for(v, j);
        match compare_group(&group, &reference[j]) {
            Ordering::Less => return true,
            Ordering::Greater => continue,
            Ordering::Equal => {
                w.place(v, j);
                let found = finds_smaller(w, reference, j + 1, m);
                w.unplace(v);
                if found {
                    return true;
                }
            }
        }
    }
    false
}

/// Canonical form of `members` (any order) under permutations of their
/// support, together with the relabelling `map[old] = new` that produces it.
/// The support is mapped onto `[|support|]`.
pub fn canonical_form(members: &[SetWord]) -> (Vec<SetWord>, Vec<usize>) {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let support = sorted.iter().fold(SetWord::EMPTY, |acc, &x| acc.union(x));
    let m = support.len();
    let mut walker = Walker::new(&sorted, support);
    let mut best: Option<(Vec<Vec<SetWord>>, Vec<usize>)> = None;
    let mut groups: Vec<Vec<SetWord>> = Vec::with_capacity(m);
    search_min(&mut walker, &mut groups, &mut best, 0, m);
    let (best_groups, order) = best.unwrap_or_default();
    let mut form: Vec<SetWord> = best_groups.into_iter().flatten().collect();
    if m == 0 && sorted.first().is_some_and(|x| x.is_empty()) {
        form = vec![SetWord::EMPTY];
    }
    let top = support.max_element().map_or(0, |e| e + 1);
    let mut map: Vec<usize> = (0..top).collect();
    for (label, &v) in order.iter().enumerate() {
        map[v] = label;
    }
    (form, map)
}

type Best = Option<(Vec<Vec<SetWord>>, Vec<usize>)>;

fn prefix_cmp(groups: &[Vec<SetWord>], best: &[Vec<SetWord>]) -> Ordering {
    for (g, b) in groups.iter().zip(best) {
        match compare_group(g, b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn search_min(w: &mut Walker<'_>, groups: &mut Vec<Vec<SetWord>>, best: &mut Best, j: usize, m: usize) {
    if j == m {
        let improves = match best {
            None => true,
            Some((bg, _)) => prefix_cmp(groups, bg) == Ordering::Less,
        };
        if improves {
            *best = Some((groups.clone(), w.order.clone()));
        }
        return;
    }
    for vi in 0..w.index.vertices.len() {
        let v = w.index.vertices[vi];
        if w.placed.contains(v) {
            continue;
        }
        let group = w.group_for(v, j);
        // the best may have changed inside an earlier sibling, so recompare
        if let Some((bg, _)) = best {
            if prefix_cmp(groups, bg) == Ordering::Equal && compare_group(&group, &bg[j]) == Ordering::Greater {
                continue;
            }
        }
        w.place(v, j);
        groups.push(group);
        search_min(w, groups, best, j + 1, m);
        groups.pop();
        w.unplace(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(e: &[usize]) -> SetWord {
        SetWord::from_elements(e.iter().copied()).unwrap()
    }

    fn sorted(v: &[SetWord]) -> Vec<SetWord> {
        let mut v = v.to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn path_canonical_form() {
        // path 2-0-1 relabels to 0-1, 0-2
        let (form, _) = canonical_form(&[set(&[0, 2]), set(&[0, 1])]);
        assert_eq!(form, vec![set(&[0, 1]), set(&[0, 2])]);
        assert!(is_canonical(&form, 3));
        // {0,1},{1,2} is isomorphic but larger than {0,1},{0,2}
        assert!(!is_canonical(&sorted(&[set(&[0, 1]), set(&[1, 2])]), 3));
    }

    #[test]
    fn gap_in_support_is_not_canonical() {
        assert!(!is_canonical(&[set(&[0, 2])], 3));
        assert!(is_canonical(&[set(&[0, 1])], 2));
    }

    #[test]
    fn isomorphic_families_share_a_form() {
        let a = [set(&[0, 1]), set(&[0, 2]), set(&[1, 2]), set(&[3, 4]), set(&[3, 5]), set(&[4, 5])];
        let b = [set(&[0, 5]), set(&[5, 3]), set(&[0, 3]), set(&[1, 2]), set(&[2, 4]), set(&[1, 4])];
        let (fa, _) = canonical_form(&a);
        let (fb, map) = canonical_form(&b);
        assert_eq!(fa, fb);
        let relabeled: Vec<SetWord> = sorted(&b.iter().map(|x| x.relabel(&map)).collect::<Vec<_>>());
        assert_eq!(relabeled, fb);
        assert!(is_canonical(&fa, 6));
    }

    #[test]
    fn mixed_sizes_and_empty_member() {
        let fam = [SetWord::EMPTY, set(&[3]), set(&[1, 3])];
        let (form, _) = canonical_form(&fam);
        assert_eq!(form, vec![SetWord::EMPTY, set(&[0]), set(&[0, 1])]);
        assert!(is_canonical(&form, 2));
    }

    #[test]
    fn non_isomorphic_families_differ() {
        let path = [set(&[0, 1]), set(&[1, 2]), set(&[2, 3])];
        let star = [set(&[0, 1]), set(&[0, 2]), set(&[0, 3])];
        assert_ne!(canonical_form(&path).0, canonical_form(&star).0);
    }
}
