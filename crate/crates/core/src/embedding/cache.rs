//! Append-only on-disk embedding cache.
//!
//! Record layout (all integers little-endian):
//!
//! ```text
//! u32 identity_len | identity bytes | [u8; 32] sha256(text) | u32 dim | dim x f32
//! ```
//!
//! A truncated trailing record (interrupted write) is ignored on load.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};

use super::{preprocess, EmbeddingVector};

type Key = (String, [u8; 32]);

pub struct SimilarityCache {
    path: PathBuf,
    store: RwLock<HashMap<Key, EmbeddingVector>>,
    writer: Mutex<BufWriter<File>>,
}

fn digest(text: &str) -> [u8; 32] {
    Sha256::digest(preprocess(text).as_bytes()).into()
}

fn read_u32(buf: &[u8], at: &mut usize) -> Option<u32> {
    let bytes = buf.get(*at..*at + 4)?;
    *at += 4;
    Some(u32::from_le_bytes(bytes.try_into().ok()?))
}

fn parse_records(buf: &[u8]) -> (HashMap<Key, EmbeddingVector>, usize) {
    let mut store = HashMap::new();
    let mut at = 0usize;
    loop {
        let start = at;
        let record = (|| {
            let id_len = read_u32(buf, &mut at)? as usize;
            let id = std::str::from_utf8(buf.get(at..at + id_len)?).ok()?.to_string();
            at += id_len;
            let hash: [u8; 32] = buf.get(at..at + 32)?.try_into().ok()?;
            at += 32;
            let dim = read_u32(buf, &mut at)? as usize;
            let raw = buf.get(at..at + 4 * dim)?;
            at += 4 * dim;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
                .collect();
            Some(((id, hash), EmbeddingVector::from_raw(values)))
        })();
        match record {
            Some((key, v)) => {
                store.insert(key, v);
            }
            None => return (store, start),
        }
        if at == buf.len() {
            return (store, at);
        }
    }
}

impl SimilarityCache {
    /// Open (or create) the cache file at `path` and load its records.
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut buf = Vec::new();
        if path.exists() {
            File::open(&path)?.read_to_end(&mut buf)?;
        }
        let (store, valid_len) = parse_records(&buf);
        if valid_len < buf.len() {
            log::warn!(
                "embedding cache {}: ignoring {} trailing bytes",
                path.display(),
                buf.len() - valid_len
            );
            let f = OpenOptions::new().write(true).open(&path)?;
            f.set_len(valid_len as u64)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            store: RwLock::new(store),
            writer: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.store.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, identity: &str, text: &str) -> Option<EmbeddingVector> {
        self.store
            .read()
            .expect("cache lock poisoned")
            .get(&(identity.to_string(), digest(text)))
            .cloned()
    }

    /// Store and append a vector. Re-inserting an existing key is a no-op.
    pub fn insert(&self, identity: &str, text: &str, vector: &EmbeddingVector) -> std::io::Result<()> {
        let key = (identity.to_string(), digest(text));
        {
            let mut store = self.store.write().expect("cache lock poisoned");
            if store.contains_key(&key) {
                return Ok(());
            }
            store.insert(key.clone(), vector.clone());
        }
        let mut record = Vec::with_capacity(40 + identity.len() + 4 * vector.dimension());
        record.extend_from_slice(&(identity.len() as u32).to_le_bytes());
        record.extend_from_slice(identity.as_bytes());
        record.extend_from_slice(&key.1);
        record.extend_from_slice(&(vector.dimension() as u32).to_le_bytes());
        for v in vector.values() {
            record.extend_from_slice(&v.to_le_bytes());
        }
        let mut w = self.writer.lock().expect("cache writer poisoned");
        w.write_all(&record)?;
        w.flush()
    }
}
