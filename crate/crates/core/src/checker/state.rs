//! Runtime system states, their canonical byte encoding, and the
//! deduplicating state store.

use std::hash::BuildHasher;
use std::ops::Range;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;
use smallvec::SmallVec;

pub(crate) type Env = SmallVec<[i64; 8]>;

/// One activation of a process body: the node to execute next and the
/// slot values (parameters and input bindings) it may read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Frame {
    pub node: u32,
    pub env: Env,
}

/// A component is a stack of frames; the frames below the top are pending
/// sequential continuations. An empty stack means the component has
/// terminated successfully.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Component {
    pub frames: SmallVec<[Frame; 2]>,
}

/// A global state: component control states, channel buffers and the
/// variable store (arrays flattened in declaration order).
///
/// Buffers of all channel instances share one vector: instance `i` owns
/// the `buf_lens[i]` values following those of instances `0..i`, message
/// fields flattened in FIFO order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SysState {
    pub(crate) comps: Vec<Component>,
    pub(crate) buf_data: Vec<i64>,
    pub(crate) buf_lens: Vec<u32>,
    pub(crate) vars: Vec<i64>,
}

impl SysState {
    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    /// Whether component `i` has reached its final `Skip`.
    pub fn is_terminated(&self, i: usize) -> bool {
        self.comps[i].frames.is_empty()
    }

    pub fn all_terminated(&self) -> bool {
        self.comps.iter().all(|c| c.frames.is_empty())
    }

    /// Flattened variable store.
    pub fn vars(&self) -> &[i64] {
        &self.vars
    }

    pub(crate) fn buf_range(&self, inst: usize) -> Range<usize> {
        let start: usize = self.buf_lens[..inst].iter().map(|&n| n as usize).sum();
        start..start + self.buf_lens[inst] as usize
    }

    /// Number of buffered values (not messages) of instance `inst`.
    pub(crate) fn buf_values(&self, inst: usize) -> usize {
        self.buf_lens[inst] as usize
    }

    pub(crate) fn buf_push(&mut self, inst: usize, vals: &[i64]) {
        let end = self.buf_range(inst).end;
        self.buf_data.splice(end..end, vals.iter().copied());
        self.buf_lens[inst] += vals.len() as u32;
    }

    pub(crate) fn buf_pop(&mut self, inst: usize, n: usize) -> SmallVec<[i64; 8]> {
        let start = self.buf_range(inst).start;
        let out = self.buf_data.drain(start..start + n).collect();
        self.buf_lens[inst] -= n as u32;
        out
    }

    pub(crate) fn encode(&self, out: &mut Vec<u8>) {
        out.clear();
        put(out, self.comps.len() as i64);
        for c in &self.comps {
            put(out, c.frames.len() as i64);
            for f in &c.frames {
                put(out, f.node as i64);
                put(out, f.env.len() as i64);
                for v in &f.env {
                    put(out, *v);
                }
            }
        }
        for n in &self.buf_lens {
            put(out, *n as i64);
        }
        for v in &self.buf_data {
            put(out, *v);
        }
        for v in &self.vars {
            put(out, *v);
        }
    }

    /// Inverse of [`encode`](Self::encode); `nbufs` and `nvars` come from
    /// the compiled program.
    pub(crate) fn decode(bytes: &[u8], nbufs: usize, nvars: usize) -> SysState {
        let mut r = Reader { bytes, pos: 0 };
        let ncomps = r.get() as usize;
        let mut comps = Vec::with_capacity(ncomps);
        for _ in 0..ncomps {
            let nframes = r.get() as usize;
            let mut frames = SmallVec::with_capacity(nframes);
            for _ in 0..nframes {
                let node = r.get() as u32;
                let n = r.get() as usize;
                let env = (0..n).map(|_| r.get()).collect();
                frames.push(Frame { node, env });
            }
            comps.push(Component { frames });
        }
        let buf_lens: Vec<u32> = (0..nbufs).map(|_| r.get() as u32).collect();
        let total: usize = buf_lens.iter().map(|&n| n as usize).sum();
        let buf_data = (0..total).map(|_| r.get()).collect();
        let vars = (0..nvars).map(|_| r.get()).collect();
        debug_assert_eq!(r.pos, bytes.len());
        SysState {
            comps,
            buf_data,
            buf_lens,
            vars,
        }
    }
}

fn put(out: &mut Vec<u8>, v: i64) {
    let mut z = ((v << 1) ^ (v >> 63)) as u64;
    loop {
        let b = (z & 0x7f) as u8;
        z >>= 7;
        if z == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn get(&mut self) -> i64 {
        let mut z = 0u64;
        let mut shift = 0;
        loop {
            let b = self.bytes[self.pos];
            self.pos += 1;
            z |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
        }
        ((z >> 1) as i64) ^ -((z & 1) as i64)
    }
}

/// Encoded states in one byte arena, deduplicated through a hash table
/// of ids. Ids are dense and follow insertion order.
#[derive(Default)]
pub(crate) struct StateStore {
    bytes: Vec<u8>,
    /// `ends[i]` is one past the last byte of state `i`.
    ends: Vec<usize>,
    table: HashTable<u32>,
    hasher: FxBuildHasher,
}

impl std::fmt::Debug for StateStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateStore")
            .field("states", &self.ends.len())
            .field("bytes", &self.bytes.len())
            .finish()
    }
}

impl StateStore {
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn get(&self, id: usize) -> &[u8] {
        let start = if id == 0 { 0 } else { self.ends[id - 1] };
        &self.bytes[start..self.ends[id]]
    }

    /// Returns the id of `key` and whether it was newly inserted.
    pub fn insert(&mut self, key: &[u8]) -> (usize, bool) {
        let h = self.hasher.hash_one(key);
        let StateStore {
            bytes,
            ends,
            table,
            hasher,
        } = self;
        let slice = |id: u32| {
            let id = id as usize;
            let start = if id == 0 { 0 } else { ends[id - 1] };
            &bytes[start..ends[id]]
        };
        if let Some(&id) = table.find(h, |&id| slice(id) == key) {
            return (id as usize, false);
        }
        let id = ends.len() as u32;
        table.insert_unique(h, id, |&other| hasher.hash_one(slice(other)));
        bytes.extend_from_slice(key);
        ends.push(bytes.len());
        (id as usize, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    fn sample() -> SysState {
        SysState {
            comps: vec![
                Component {
                    frames: smallvec![
                        Frame {
                            node: 7,
                            env: smallvec![0, -1, i64::MAX],
                        },
                        Frame {
                            node: 300,
                            env: smallvec![],
                        },
                    ],
                },
                Component {
                    frames: smallvec![],
                },
            ],
            buf_data: vec![1, 2, 3],
            buf_lens: vec![3, 0],
            vars: vec![i64::MIN, 0, 5],
        }
    }

    #[test]
    fn encoding_round_trips() {
        let s = sample();
        let mut bytes = Vec::new();
        s.encode(&mut bytes);
        assert_eq!(SysState::decode(&bytes, 2, 3), s);
    }

    #[test]
    fn flat_buffers_keep_fifo_order_per_instance() {
        let mut s = sample();
        s.buf_push(1, &[9, 8]);
        s.buf_push(0, &[4]);
        assert_eq!(s.buf_data, vec![1, 2, 3, 4, 9, 8]);
        assert_eq!(s.buf_pop(1, 1).as_slice(), &[9]);
        assert_eq!(s.buf_pop(0, 2).as_slice(), &[1, 2]);
        assert_eq!(s.buf_data, vec![3, 4, 8]);
        assert_eq!(s.buf_lens, vec![2, 1]);
    }

    #[test]
    fn store_deduplicates() {
        let mut st = StateStore::default();
        assert_eq!(st.insert(b"abc"), (0, true));
        assert_eq!(st.insert(b"de"), (1, true));
        assert_eq!(st.insert(b"abc"), (0, false));
        assert_eq!(st.get(1), b"de");
        assert_eq!(st.len(), 2);
    }
}
