//! Paged follower-ID fetching.
//!
//! A [`PageSource`] serves one page per request; [`fetch_all_ids`] walks the
//! pages with a strictly monotone cursor, retries unavailable pages with a
//! bounded exponential backoff, and keeps the request rate under the
//! configured per-minute limit. Time is abstracted behind [`Clock`] so that
//! backoff and throttling are testable with [`VirtualClock`].

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::snapshot::{Candidate, Snapshot, Timestamp};

/// Opaque position in a paged listing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PageToken(pub String);

impl PageToken {
    pub fn first() -> Self {
        PageToken(String::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub ids: Vec<u64>,
    /// `None` marks the last page.
    pub next: Option<PageToken>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PageError {
    #[error("source unavailable: {0}")]
    Unavailable(String),
    #[error("malformed page: {0}")]
    Malformed(String),
}

/// A backend serving follower-ID pages. Fixture directories and network
/// clients both implement this.
pub trait PageSource {
    fn get_page(&mut self, token: &PageToken) -> Result<Page, PageError>;
}

/// Monotonic seconds clock.
pub trait Clock {
    fn now(&self) -> f64;
    fn sleep(&mut self, seconds: f64);
}

/// A clock that only advances when slept on.
#[derive(Debug, Default, Clone)]
pub struct VirtualClock {
    now: f64,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> f64 {
        self.now
    }

    fn sleep(&mut self, seconds: f64) {
        if seconds > 0.0 {
            self.now += seconds;
        }
    }
}

/// Description of a paged follower listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagedSource {
    pub source_id: String,
    pub page_size: usize,
    /// Maximum requests in any rolling 60-second window; 0 means unlimited.
    pub rate_limit: u32,
}

/// Progress of a single fetch job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchCursor {
    pub source_id: String,
    pub next_page_token: Option<PageToken>,
    pub ids_seen: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("source {source_id} unavailable at page {page} after {attempts} attempts: {reason}")]
    Unavailable { source_id: String, page: usize, attempts: u32, reason: String },
    #[error("malformed page {page} from source {source_id}: {reason}")]
    Malformed { source_id: String, page: usize, reason: String },
    #[error("source {source_id} revisited page token {token:?} at page {page}")]
    CursorCycle { source_id: String, page: usize, token: String },
}

/// Waits before each retry of an unavailable page, in seconds.
pub const RETRY_BACKOFF: [f64; 3] = [1.0, 2.0, 4.0];

const WINDOW_SECONDS: f64 = 60.0;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchStats {
    pub requests: u64,
    pub retries: u64,
    pub pages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchOutcome {
    pub ids: Vec<u64>,
    pub stats: FetchStats,
    /// Times at which each request was issued, in clock seconds.
    pub request_times: Vec<f64>,
    pub cursor: FetchCursor,
}

struct Throttle {
    limit: u32,
    recent: VecDeque<f64>,
}

impl Throttle {
    fn acquire<C: Clock>(&mut self, clock: &mut C) -> f64 {
        if self.limit > 0 {
            loop {
                let now = clock.now();
                while self.recent.front().is_some_and(|&t| t <= now - WINDOW_SECONDS) {
                    self.recent.pop_front();
                }
                if (self.recent.len() as u32) < self.limit {
                    break;
                }
                let oldest = *self.recent.front().expect("window is full");
                clock.sleep(oldest + WINDOW_SECONDS - now);
            }
        }
        let now = clock.now();
        self.recent.push_back(now);
        now
    }
}

/// Fetches every page of `source`, returning IDs in arrival order.
///
/// Duplicates across pages are preserved. Each unavailable page is retried
/// up to `RETRY_BACKOFF.len()` times before failing.
pub fn fetch_all_ids<S: PageSource, C: Clock>(
    source: &PagedSource,
    backend: &mut S,
    clock: &mut C,
) -> Result<FetchOutcome, FetchError> {
    let mut throttle = Throttle { limit: source.rate_limit, recent: VecDeque::new() };
    let mut cursor = FetchCursor {
        source_id: source.source_id.clone(),
        next_page_token: Some(PageToken::first()),
        ids_seen: 0,
    };
    let mut visited = BTreeSet::new();
    let mut ids = Vec::new();
    let mut stats = FetchStats::default();
    let mut request_times = Vec::new();

    while let Some(token) = cursor.next_page_token.take() {
        let page_index = stats.pages;
        if !visited.insert(token.clone()) {
            return Err(FetchError::CursorCycle {
                source_id: source.source_id.clone(),
                page: page_index,
                token: token.0,
            });
        }
        let mut attempt = 0u32;
        let page = loop {
            request_times.push(throttle.acquire(clock));
            stats.requests += 1;
            attempt += 1;
            match backend.get_page(&token) {
                Ok(page) => break page,
                Err(PageError::Malformed(reason)) => {
                    return Err(FetchError::Malformed {
                        source_id: source.source_id.clone(),
                        page: page_index,
                        reason,
                    })
                }
                Err(PageError::Unavailable(reason)) => {
                    let Some(&wait) = RETRY_BACKOFF.get(attempt as usize - 1) else {
                        return Err(FetchError::Unavailable {
                            source_id: source.source_id.clone(),
                            page: page_index,
                            attempts: attempt,
                            reason,
                        });
                    };
                    stats.retries += 1;
                    clock.sleep(wait);
                }
            }
        };
        cursor.ids_seen += page.ids.len() as u64;
        ids.extend_from_slice(&page.ids);
        stats.pages += 1;
        cursor.next_page_token = page.next;
    }

    Ok(FetchOutcome { ids, stats, request_times, cursor })
}

/// Fetches all pages and materializes them as a sorted, deduplicated snapshot.
pub fn capture_snapshot<S: PageSource, C: Clock>(
    source: &PagedSource,
    backend: &mut S,
    clock: &mut C,
    candidate: Candidate,
    captured_at: Timestamp,
) -> Result<Snapshot, FetchError> {
    let outcome = fetch_all_ids(source, backend, clock)?;
    Ok(Snapshot::from_unsorted(candidate, captured_at, outcome.ids))
}

/// An in-memory page source, mostly for tests and examples.
///
/// Tokens are page indices rendered as decimal strings; the first page uses
/// the empty token.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    pages: Vec<Vec<u64>>,
    /// Number of leading requests per page index that fail as unavailable.
    failures: Vec<u32>,
}

impl MemorySource {
    pub fn new(pages: Vec<Vec<u64>>) -> Self {
        let failures = alloc::vec![0; pages.len()];
        MemorySource { pages, failures }
    }

    /// Splits `ids` into pages of `page_size`.
    pub fn chunked(ids: &[u64], page_size: usize) -> Self {
        Self::new(ids.chunks(page_size.max(1)).map(<[u64]>::to_vec).collect())
    }

    /// Makes the next `count` requests for page `index` fail as unavailable.
    pub fn fail_page(&mut self, index: usize, count: u32) {
        self.failures[index] = count;
    }
}

pub fn page_index(token: &PageToken) -> Result<usize, PageError> {
    if token.0.is_empty() {
        return Ok(0);
    }
    token.0.parse().map_err(|_| PageError::Malformed(alloc::format!("bad page token {:?}", token.0)))
}

impl PageSource for MemorySource {
    fn get_page(&mut self, token: &PageToken) -> Result<Page, PageError> {
        let index = page_index(token)?;
        if self.pages.is_empty() && index == 0 {
            return Ok(Page { ids: Vec::new(), next: None });
        }
        if index >= self.pages.len() {
            return Err(PageError::Malformed(alloc::format!("no page {index}")));
        }
        if self.failures[index] > 0 {
            self.failures[index] -= 1;
            return Err(PageError::Unavailable("simulated outage".into()));
        }
        let next = (index + 1 < self.pages.len()).then(|| PageToken(alloc::format!("{}", index + 1)));
        Ok(Page { ids: self.pages[index].clone(), next })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn source(rate_limit: u32) -> PagedSource {
        PagedSource { source_id: "test".into(), page_size: 1000, rate_limit }
    }

    fn fetch(pages: Vec<Vec<u64>>) -> FetchOutcome {
        fetch_all_ids(&source(0), &mut MemorySource::new(pages), &mut VirtualClock::new()).unwrap()
    }

    #[test]
    fn concatenates_pages_in_arrival_order() {
        assert_eq!(fetch(vec![vec![1, 3], vec![2]]).ids, vec![1, 3, 2]);
        assert_eq!(fetch(vec![vec![5, 5], vec![5]]).ids, vec![5, 5, 5]);
    }

    #[test]
    fn three_full_pages_take_three_requests() {
        let ids: Vec<u64> = (0..3000).collect();
        let out = fetch_all_ids(&source(0), &mut MemorySource::chunked(&ids, 1000), &mut VirtualClock::new())
            .unwrap();
        assert_eq!(out.ids.len(), 3000);
        assert_eq!(out.stats.requests, 3);
        assert_eq!(out.cursor.ids_seen, 3000);
        assert_eq!(out.cursor.next_page_token, None);
    }

    #[test]
    fn capture_sorts_and_dedups() {
        let snap = capture_snapshot(
            &source(0),
            &mut MemorySource::new(vec![vec![3, 1], vec![2, 3]]),
            &mut VirtualClock::new(),
            "sanders".into(),
            Timestamp(10),
        )
        .unwrap();
        assert_eq!(snap.ids(), &[1, 2, 3]);
        assert_eq!(snap.captured_at(), Timestamp(10));

        let empty = capture_snapshot(
            &source(0),
            &mut MemorySource::new(vec![]),
            &mut VirtualClock::new(),
            "sanders".into(),
            Timestamp(10),
        )
        .unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn retries_with_exponential_backoff() {
        let mut backend = MemorySource::new(vec![vec![1], vec![2]]);
        backend.fail_page(1, 3);
        let mut clock = VirtualClock::new();
        let out = fetch_all_ids(&source(0), &mut backend, &mut clock).unwrap();
        assert_eq!(out.ids, vec![1, 2]);
        assert_eq!(out.stats.retries, 3);
        assert_eq!(out.stats.requests, 5);
        assert_eq!(out.request_times, vec![0.0, 0.0, 1.0, 3.0, 7.0]);
    }

    #[test]
    fn gives_up_after_bounded_retries() {
        let mut backend = MemorySource::new(vec![vec![1], vec![2]]);
        backend.fail_page(1, 4);
        let err = fetch_all_ids(&source(0), &mut backend, &mut VirtualClock::new()).unwrap_err();
        assert!(matches!(err, FetchError::Unavailable { page: 1, attempts: 4, .. }));
    }

    struct Cyclic;
    impl PageSource for Cyclic {
        fn get_page(&mut self, _: &PageToken) -> Result<Page, PageError> {
            Ok(Page { ids: vec![1], next: Some(PageToken("again".into())) })
        }
    }

    #[test]
    fn revisited_token_is_an_error() {
        let err = fetch_all_ids(&source(0), &mut Cyclic, &mut VirtualClock::new()).unwrap_err();
        assert!(matches!(err, FetchError::CursorCycle { page: 2, .. }));
    }

    #[test]
    fn rate_limit_holds_in_every_rolling_window() {
        let ids: Vec<u64> = (0..50).collect();
        let mut backend = MemorySource::chunked(&ids, 2);
        backend.fail_page(7, 2);
        let mut clock = VirtualClock::new();
        let out = fetch_all_ids(&source(4), &mut backend, &mut clock).unwrap();
        assert_eq!(out.ids, ids);
        let times = &out.request_times;
        for (i, &t) in times.iter().enumerate() {
            let in_window = times[i..].iter().take_while(|&&u| u < t + 60.0).count();
            assert!(in_window <= 4, "window starting at {t} has {in_window} requests");
        }
        assert!(clock.now() > 0.0);
    }
}
