//! Set analytics over follower snapshots: membership, cross-following
//! partitions and the destinations of a cohort.

use alloc::string::String;
use alloc::vec::Vec;

use crate::snapshot::Snapshot;

/// Size ratio above which intersections switch from a merge pass to binary
/// searching the larger set.
pub const BINARY_SEARCH_RATIO: usize = 32;

/// Membership test by binary search over the sorted IDs.
pub fn contains(snapshot: &Snapshot, id: u64) -> bool {
    binary_search(snapshot.ids(), id)
}

fn binary_search(ids: &[u64], id: u64) -> bool {
    let (mut lo, mut hi) = (0usize, ids.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match ids[mid].cmp(&id) {
            core::cmp::Ordering::Less => lo = mid + 1,
            core::cmp::Ordering::Greater => hi = mid,
            core::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// For each element of `items`, whether it occurs in `set`. Both slices
/// must be ascending.
pub fn membership_mask(items: &[u64], set: &[u64]) -> Vec<bool> {
    if set.len() > items.len().saturating_mul(BINARY_SEARCH_RATIO) {
        // Few queries against a large set: binary search, narrowing the
        // lower bound as queries ascend.
        let mut base = 0usize;
        items
            .iter()
            .map(|&id| {
                let rest = &set[base..];
                let pos = rest.partition_point(|&x| x < id);
                base += pos;
                rest.get(pos) == Some(&id)
            })
            .collect()
    } else if items.len() > set.len().saturating_mul(BINARY_SEARCH_RATIO) {
        // Many items, small set: binary-search each set element into items.
        let mut mask = alloc::vec![false; items.len()];
        let mut base = 0usize;
        for &id in set {
            let rest = &items[base..];
            let pos = rest.partition_point(|&x| x < id);
            if rest.get(pos) == Some(&id) {
                mask[base + pos] = true;
            }
            base += pos;
        }
        mask
    } else {
        let mut j = 0usize;
        items
            .iter()
            .map(|&id| {
                while j < set.len() && set[j] < id {
                    j += 1;
                }
                j < set.len() && set[j] == id
            })
            .collect()
    }
}

/// Number of elements shared by two ascending slices.
pub fn intersection_count(a: &[u64], b: &[u64]) -> usize {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    membership_mask(small, large).into_iter().filter(|&m| m).count()
}

/// The focal candidate's followers split by whether they also follow
/// candidates A and B.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPartition {
    /// Follow the focal candidate and A, not B.
    pub group_a_only: Vec<u64>,
    /// Follow the focal candidate and B, not A.
    pub group_b_only: Vec<u64>,
    /// Follow all three.
    pub group_both: Vec<u64>,
    /// Follow only the focal candidate.
    pub group_focal_only: Vec<u64>,
}

impl GroupPartition {
    pub fn total(&self) -> usize {
        self.group_a_only.len()
            + self.group_b_only.len()
            + self.group_both.len()
            + self.group_focal_only.len()
    }

    /// Group sizes in the order a-only, b-only, both, focal-only.
    pub fn counts(&self) -> [usize; 4] {
        [
            self.group_a_only.len(),
            self.group_b_only.len(),
            self.group_both.len(),
            self.group_focal_only.len(),
        ]
    }

    /// Group shares of the focal set; all zero for an empty focal set.
    pub fn shares(&self) -> [f64; 4] {
        let total = self.total();
        self.counts().map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
    }
}

pub fn partition_groups(focal: &Snapshot, a: &Snapshot, b: &Snapshot) -> GroupPartition {
    let ids = focal.ids();
    let in_a = membership_mask(ids, a.ids());
    let in_b = membership_mask(ids, b.ids());
    let mut groups = GroupPartition::default();
    for ((&id, &fa), &fb) in ids.iter().zip(&in_a).zip(&in_b) {
        match (fa, fb) {
            (true, false) => groups.group_a_only.push(id),
            (false, true) => groups.group_b_only.push(id),
            (true, true) => groups.group_both.push(id),
            (false, false) => groups.group_focal_only.push(id),
        }
    }
    groups
}

/// Share of a cohort found in each named destination snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationRates {
    pub cohort_size: usize,
    pub rates: Vec<(String, f64)>,
}

impl DestinationRates {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.rates.iter().find(|(n, _)| n == name).map(|&(_, r)| r)
    }
}

/// `rate_d = |cohort ∩ d| / |cohort|` for each destination, 0 for an empty
/// cohort. `cohort` must be ascending.
pub fn destination_rates<'a, I>(cohort: &[u64], destinations: I) -> DestinationRates
where
    I: IntoIterator<Item = (&'a str, &'a Snapshot)>,
{
    let rates = destinations
        .into_iter()
        .map(|(name, snap)| {
            let rate = if cohort.is_empty() {
                0.0
            } else {
                intersection_count(cohort, snap.ids()) as f64 / cohort.len() as f64
            };
            (String::from(name), rate)
        })
        .collect();
    DestinationRates { cohort_size: cohort.len(), rates }
}
