//! Indexed min-heap keyed by exact rationals.
//!
//! The growth engines reschedule edge-tightening predictions constantly, so
//! the queue supports in-place `update` and `remove` by item id instead of
//! lazy deletion (which would hold millions of stale `Rat` clones alive).

use crate::rat::Rat;

const NONE: u32 = u32::MAX;

pub struct RatHeap {
    /// heap[i] = item id
    heap: Vec<u32>,
    /// pos[id] = index in `heap`, or NONE
    pos: Vec<u32>,
    keys: Vec<Rat>,
}

impl RatHeap {
    pub fn new(capacity: usize) -> Self {
        RatHeap {
            heap: Vec::new(),
            pos: vec![NONE; capacity],
            keys: vec![Rat::ZERO; capacity],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.pos[id as usize] != NONE
    }

    pub fn key(&self, id: u32) -> &Rat {
        &self.keys[id as usize]
    }

    /// Inserts or updates `id` with `key`.
    pub fn set(&mut self, id: u32, key: Rat) {
        let i = self.pos[id as usize];
        if i == NONE {
            self.keys[id as usize] = key;
            self.pos[id as usize] = self.heap.len() as u32;
            self.heap.push(id);
            self.sift_up(self.heap.len() - 1);
        } else {
            let up = key < self.keys[id as usize];
            self.keys[id as usize] = key;
            if up {
                self.sift_up(i as usize);
            } else {
                self.sift_down(i as usize);
            }
        }
    }

    pub fn remove(&mut self, id: u32) {
        let i = self.pos[id as usize];
        if i == NONE {
            return;
        }
        let i = i as usize;
        let last = self.heap.len() - 1;
        self.heap.swap(i, last);
        self.pos[self.heap[i] as usize] = i as u32;
        self.heap.pop();
        self.pos[id as usize] = NONE;
        if i < self.heap.len() {
            self.sift_down(i);
            self.sift_up(i);
        }
    }

    pub fn peek(&self) -> Option<(u32, &Rat)> {
        self.heap.first().map(|&id| (id, &self.keys[id as usize]))
    }

    pub fn pop(&mut self) -> Option<(u32, Rat)> {
        let &id = self.heap.first()?;
        self.remove(id);
        Some((id, self.keys[id as usize].clone()))
    }

    /// (key, id) order; ties broken by id for determinism.
    fn less(&self, a: u32, b: u32) -> bool {
        match self.keys[a as usize].cmp(&self.keys[b as usize]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => a < b,
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 4;
            if self.less(self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                self.pos[self.heap[i] as usize] = i as u32;
                self.pos[self.heap[parent] as usize] = parent as u32;
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let first_child = 4 * i + 1;
            if first_child >= self.heap.len() {
                break;
            }
            let mut best = first_child;
            let end = (first_child + 4).min(self.heap.len());
            for c in first_child + 1..end {
                if self.less(self.heap[c], self.heap[best]) {
                    best = c;
                }
            }
            if self.less(self.heap[best], self.heap[i]) {
                self.heap.swap(i, best);
                self.pos[self.heap[i] as usize] = i as u32;
                self.pos[self.heap[best] as usize] = best as u32;
                i = best;
            } else {
                break;
            }
        }
    }
}
