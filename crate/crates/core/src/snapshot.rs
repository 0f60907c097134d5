//! Follower-ID snapshots and the new-follower/unfollower diff between two of
//! them.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A candidate's account label, e.g. `"clinton"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate(String);

impl Candidate {
    pub fn new(label: impl Into<String>) -> Self {
        Candidate(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Candidate {
    fn from(s: &str) -> Self {
        Candidate(s.into())
    }
}

/// UTC instant with one-second resolution, as seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SnapshotError {
    #[error("unsorted payload: id {next} follows {prev} at position {position}")]
    Unsorted { position: usize, prev: u64, next: u64 },
    #[error("cannot diff snapshots of different candidates ({older} vs {newer})")]
    CandidateMismatch { older: Candidate, newer: Candidate },
    #[error("snapshot timestamps must strictly increase ({older} then {newer})")]
    NonIncreasingTimestamps { older: i64, newer: i64 },
}

/// A candidate's follower set at one instant.
///
/// IDs are kept strictly ascending, which also rules out duplicates.
/// Snapshots are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    candidate: Candidate,
    captured_at: Timestamp,
    ids: Vec<u64>,
}

impl Snapshot {
    /// Builds a snapshot from IDs already in strictly ascending order.
    pub fn from_sorted(
        candidate: Candidate,
        captured_at: Timestamp,
        ids: Vec<u64>,
    ) -> Result<Self, SnapshotError> {
        if let Some(position) = ids.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SnapshotError::Unsorted {
                position: position + 1,
                prev: ids[position],
                next: ids[position + 1],
            });
        }
        Ok(Snapshot { candidate, captured_at, ids })
    }

    /// Builds a snapshot from raw fetched IDs, sorting and deduplicating.
    pub fn from_unsorted(candidate: Candidate, captured_at: Timestamp, mut ids: Vec<u64>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Snapshot { candidate, captured_at, ids }
    }

    pub fn candidate(&self) -> &Candidate {
        &self.candidate
    }

    pub fn captured_at(&self) -> Timestamp {
        self.captured_at
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn into_ids(self) -> Vec<u64> {
        self.ids
    }
}

/// Followers gained and lost between two snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffResult {
    pub new_followers: Vec<u64>,
    pub unfollowers: Vec<u64>,
    pub net_gain: i64,
}

/// Diffs two snapshots of the same candidate in one merge pass.
///
/// `new_followers = newer \ older`, `unfollowers = older \ newer`, and
/// `net_gain = |new_followers| - |unfollowers| = |newer| - |older|`.
pub fn diff(older: &Snapshot, newer: &Snapshot) -> Result<DiffResult, SnapshotError> {
    if older.candidate != newer.candidate {
        return Err(SnapshotError::CandidateMismatch {
            older: older.candidate.clone(),
            newer: newer.candidate.clone(),
        });
    }
    if older.captured_at >= newer.captured_at {
        return Err(SnapshotError::NonIncreasingTimestamps {
            older: older.captured_at.0,
            newer: newer.captured_at.0,
        });
    }
    let (unfollowers, new_followers) = symmetric_difference(&older.ids, &newer.ids);
    let net_gain = new_followers.len() as i64 - unfollowers.len() as i64;
    Ok(DiffResult { new_followers, unfollowers, net_gain })
}

/// Returns `(a \ b, b \ a)` for two strictly ascending slices.
pub fn symmetric_difference(a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut only_a = Vec::new();
    let mut only_b = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x < y {
            only_a.push(x);
            i += 1;
        } else if y < x {
            only_b.push(y);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    only_a.extend_from_slice(&a[i..]);
    only_b.extend_from_slice(&b[j..]);
    (only_a, only_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn snap(ts: i64, ids: &[u64]) -> Snapshot {
        Snapshot::from_sorted("trump".into(), Timestamp(ts), ids.to_vec()).unwrap()
    }

    #[test]
    fn diff_by_hand() {
        let d = diff(&snap(1, &[1, 2, 3, 5]), &snap(2, &[2, 3, 6, 7])).unwrap();
        assert_eq!(d.new_followers, vec![6, 7]);
        assert_eq!(d.unfollowers, vec![1, 5]);
        assert_eq!(d.net_gain, 0);
    }

    #[test]
    fn diff_from_empty_base() {
        let d = diff(&snap(1, &[]), &snap(2, &[9])).unwrap();
        assert_eq!(d.new_followers, vec![9]);
        assert!(d.unfollowers.is_empty());
        assert_eq!(d.net_gain, 1);
    }

    #[test]
    fn diff_rejects_mismatched_candidates() {
        let a = snap(1, &[1]);
        let b = Snapshot::from_sorted("clinton".into(), Timestamp(2), vec![1]).unwrap();
        assert!(matches!(diff(&a, &b), Err(SnapshotError::CandidateMismatch { .. })));
    }

    #[test]
    fn diff_rejects_equal_or_reversed_timestamps() {
        assert!(matches!(
            diff(&snap(5, &[1]), &snap(5, &[2])),
            Err(SnapshotError::NonIncreasingTimestamps { .. })
        ));
        assert!(matches!(
            diff(&snap(6, &[1]), &snap(5, &[2])),
            Err(SnapshotError::NonIncreasingTimestamps { .. })
        ));
    }

    #[test]
    fn from_sorted_rejects_unsorted_and_duplicates() {
        let err = Snapshot::from_sorted("x".into(), Timestamp(0), vec![2, 1]).unwrap_err();
        assert_eq!(err, SnapshotError::Unsorted { position: 1, prev: 2, next: 1 });
        assert!(err.to_string().contains("unsorted payload"));
        assert!(Snapshot::from_sorted("x".into(), Timestamp(0), vec![1, 1]).is_err());
    }

    #[test]
    fn from_unsorted_sorts_and_dedups() {
        let s = Snapshot::from_unsorted("x".into(), Timestamp(0), vec![3, 1, 2, 3]);
        assert_eq!(s.ids(), &[1, 2, 3]);
    }
}
