use std::collections::HashMap;

use crate::dataset::PositionPair;

/// Default number of cached path-loss values.
pub const DEFAULT_CAPACITY: usize = 65_536;
/// Default quantization step of cache keys, meters.
pub const DEFAULT_QUANTUM_M: f64 = 1e-3;

/// Quantized, direction-ordered pair of positions.
pub type CacheKey = [i64; 6];

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Entry {
    key: CacheKey,
    value: f64,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    /// Regressor evaluations; always equal to `misses`.
    pub evaluations: u64,
    pub size: usize,
}

/// Least-recently-used memo of path-loss predictions.
///
/// Entries live in a slab threaded by an intrusive doubly-linked list (most
/// recent at `head`), so lookups, promotions and evictions are O(1).
/// Capacity 0 disables caching: every query is a miss.
#[derive(Debug, Clone)]
pub struct PathLossCache {
    capacity: usize,
    quantum: f64,
    map: HashMap<CacheKey, usize>,
    slab: Vec<Entry>,
    free: Vec<usize>,
    head: usize,
    tail: usize,
    hits: u64,
    misses: u64,
}

impl Default for PathLossCache {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY, DEFAULT_QUANTUM_M)
    }
}

impl PathLossCache {
    pub fn new(capacity: usize, quantum: f64) -> Self {
        assert!(
            quantum > 0.0 && quantum.is_finite(),
            "cache quantum must be positive"
        );
        Self {
            capacity,
            quantum,
            map: HashMap::new(),
            slab: Vec::new(),
            free: Vec::new(),
            head: NIL,
            tail: NIL,
            hits: 0,
            misses: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn key(&self, pair: &PositionPair) -> CacheKey {
        pair.coords().map(|c| (c / self.quantum).round() as i64)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits,
            misses: self.misses,
            evaluations: self.misses,
            size: self.map.len(),
        }
    }

    /// Returns the cached value for `pair`, or computes it with `eval`,
    /// stores it and returns it.
    pub fn get_or_insert_with(&mut self, pair: &PositionPair, eval: impl FnOnce() -> f64) -> f64 {
        if self.capacity == 0 {
            self.misses += 1;
            return eval();
        }
        let key = self.key(pair);
        if let Some(&idx) = self.map.get(&key) {
            self.hits += 1;
            self.promote(idx);
            return self.slab[idx].value;
        }
        self.misses += 1;
        let value = eval();
        self.insert(key, value);
        value
    }

    /// Changes capacity and quantum. Shrinking evicts least-recently-used
    /// entries; a new quantum invalidates every key and empties the cache.
    /// Counters are kept.
    pub fn configure(&mut self, capacity: usize, quantum: f64) {
        assert!(
            quantum > 0.0 && quantum.is_finite(),
            "cache quantum must be positive"
        );
        if quantum != self.quantum {
            self.drop_entries();
            self.quantum = quantum;
        }
        self.capacity = capacity;
        while self.map.len() > self.capacity {
            self.evict_lru();
        }
    }

    /// Empties the cache and resets the counters.
    pub fn clear(&mut self) {
        self.drop_entries();
        self.hits = 0;
        self.misses = 0;
    }

    fn drop_entries(&mut self) {
        self.map.clear();
        self.slab.clear();
        self.free.clear();
        self.head = NIL;
        self.tail = NIL;
    }

    fn unlink(&mut self, idx: usize) {
        let (prev, next) = (self.slab[idx].prev, self.slab[idx].next);
        if prev != NIL {
            self.slab[prev].next = next;
        } else {
            self.head = next;
        }
        if next != NIL {
            self.slab[next].prev = prev;
        } else {
            self.tail = prev;
        }
    }

    fn push_front(&mut self, idx: usize) {
        self.slab[idx].prev = NIL;
        self.slab[idx].next = self.head;
        if self.head != NIL {
            self.slab[self.head].prev = idx;
        }
        self.head = idx;
        if self.tail == NIL {
            self.tail = idx;
        }
    }

    fn promote(&mut self, idx: usize) {
        if self.head != idx {
            self.unlink(idx);
            self.push_front(idx);
        }
    }

    fn evict_lru(&mut self) {
        let idx = self.tail;
        if idx == NIL {
            return;
        }
        self.unlink(idx);
        self.map.remove(&self.slab[idx].key);
        self.free.push(idx);
    }

    fn insert(&mut self, key: CacheKey, value: f64) {
        if self.map.len() >= self.capacity {
            self.evict_lru();
        }
        let entry = Entry {
            key,
            value,
            prev: NIL,
            next: NIL,
        };
        let idx = match self.free.pop() {
            Some(i) => {
                self.slab[i] = entry;
                i
            }
            None => {
                self.slab.push(entry);
                self.slab.len() - 1
            }
        };
        self.map.insert(key, idx);
        self.push_front(idx);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Position;

    fn pair(i: usize) -> PositionPair {
        PositionPair::new(Position::ORIGIN, Position::new(i as f64, 0.0, 1.0))
    }

    #[test]
    fn memoizes_repeated_pairs() {
        let mut c = PathLossCache::default();
        let mut evals = 0;
        for q in 0..100 {
            let p = pair(q % 10);
            let v = c.get_or_insert_with(&p, || {
                evals += 1;
                (q % 10) as f64
            });
            assert_eq!(v, (q % 10) as f64);
        }
        let s = c.stats();
        assert_eq!(evals, 10);
        assert_eq!((s.hits, s.misses, s.evaluations, s.size), (90, 10, 10, 10));
    }

    #[test]
    fn round_robin_over_capacity_thrashes() {
        let mut c = PathLossCache::new(5, DEFAULT_QUANTUM_M);
        for _ in 0..2 {
            for i in 0..10 {
                c.get_or_insert_with(&pair(i), || i as f64);
            }
        }
        assert_eq!(c.stats().evaluations, 20);
        assert_eq!(c.stats().hits, 0);
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn lru_order_is_respected() {
        let mut c = PathLossCache::new(2, DEFAULT_QUANTUM_M);
        c.get_or_insert_with(&pair(1), || 1.0);
        c.get_or_insert_with(&pair(2), || 2.0);
        c.get_or_insert_with(&pair(1), || unreachable!());
        c.get_or_insert_with(&pair(3), || 3.0); // evicts 2
        c.get_or_insert_with(&pair(1), || unreachable!());
        let mut hit = true;
        c.get_or_insert_with(&pair(2), || {
            hit = false;
            2.0
        });
        assert!(!hit);
    }

    #[test]
    fn disabled_cache_never_hits() {
        let mut c = PathLossCache::new(0, DEFAULT_QUANTUM_M);
        for _ in 0..5 {
            c.get_or_insert_with(&pair(1), || 1.0);
        }
        assert_eq!(
            c.stats(),
            CacheStats {
                hits: 0,
                misses: 5,
                evaluations: 5,
                size: 0
            }
        );
    }

    #[test]
    fn shrinking_evicts_least_recent() {
        let mut c = PathLossCache::new(10, DEFAULT_QUANTUM_M);
        for i in 0..10 {
            c.get_or_insert_with(&pair(i), || i as f64);
        }
        c.configure(3, DEFAULT_QUANTUM_M);
        assert_eq!(c.len(), 3);
        for i in 7..10 {
            c.get_or_insert_with(&pair(i), || unreachable!());
        }
        c.clear();
        assert_eq!(c.stats(), CacheStats::default());
    }

    #[test]
    fn quantization_merges_submillimeter_offsets() {
        let mut c = PathLossCache::default();
        let a = pair(1);
        let b = PositionPair::new(Position::new(0.0002, 0.0, 0.0), a.rx);
        c.get_or_insert_with(&a, || 1.0);
        assert_eq!(c.get_or_insert_with(&b, || 2.0), 1.0);
        // direction matters
        assert_eq!(c.get_or_insert_with(&a.reversed(), || 3.0), 3.0);
    }
}
