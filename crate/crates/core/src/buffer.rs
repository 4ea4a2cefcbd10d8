use std::collections::VecDeque;

/// A value tagged with the frame it was observed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stamped<T> {
    pub frame: u64,
    pub value: T,
}

/// Bounded history ordered newest first; index 0 is the most recent entry.
/// Pushing past capacity evicts the oldest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer<T> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T> HistoryBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        HistoryBuffer { capacity, items: VecDeque::with_capacity(capacity) }
    }

    pub fn push(&mut self, value: T) {
        if self.items.len() == self.capacity {
            self.items.pop_back();
        }
        self.items.push_front(value);
    }

    pub fn latest(&self) -> Option<&T> {
        self.items.front()
    }

    pub fn get(&self, k: usize) -> Option<&T> {
        self.items.get(k)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    /// Newest to oldest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}
