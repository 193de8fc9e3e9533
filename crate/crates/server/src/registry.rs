//! Space registry: bundled spaces loaded on demand plus uploaded spaces that
//! expire after a TTL and share a memory budget.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use embias::catalog::SpaceEntry;
use embias::EmbeddingSpace;
use serde::Serialize;

use crate::error::{ApiError, ApiResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Builtin,
    Uploaded,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceHandle {
    pub id: String,
    pub name: String,
    pub dim: usize,
    pub vocab_size: usize,
    pub origin: Origin,
    /// Unix seconds.
    pub created_at: u64,
}

enum Storage {
    Lazy {
        entry: SpaceEntry,
        loaded: Mutex<Option<Arc<EmbeddingSpace>>>,
    },
    Resident {
        space: Arc<EmbeddingSpace>,
        expires: Instant,
        bytes: usize,
        seq: u64,
    },
}

struct Slot {
    handle: SpaceHandle,
    storage: Arc<Storage>,
}

struct Inner {
    slots: HashMap<String, Slot>,
    used_bytes: usize,
    next_seq: u64,
}

pub struct Registry {
    inner: RwLock<Inner>,
    ttl: Duration,
    memory_cap: usize,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn builtin_id(name: &str) -> String {
    format!("builtin-{name}")
}

impl Registry {
    pub fn new(builtins: Vec<SpaceEntry>, ttl: Duration, memory_cap: usize) -> Self {
        let now = unix_now();
        let slots = builtins
            .into_iter()
            .map(|entry| {
                let handle = SpaceHandle {
                    id: builtin_id(&entry.name),
                    name: entry.name.clone(),
                    dim: entry.dim,
                    vocab_size: entry.vocab_size,
                    origin: Origin::Builtin,
                    created_at: now,
                };
                let storage = Storage::Lazy {
                    entry,
                    loaded: Mutex::new(None),
                };
                (
                    handle.id.clone(),
                    Slot {
                        handle,
                        storage: Arc::new(storage),
                    },
                )
            })
            .collect();
        Self {
            inner: RwLock::new(Inner {
                slots,
                used_bytes: 0,
                next_seq: 0,
            }),
            ttl,
            memory_cap,
        }
    }

    fn sweep(inner: &mut Inner, now: Instant) {
        let expired: Vec<String> = inner
            .slots
            .iter()
            .filter(|(_, s)| matches!(*s.storage, Storage::Resident { expires, .. } if expires <= now))
            .map(|(id, _)| id.clone())
            .collect();
        for id in expired {
            Self::remove(inner, &id);
        }
    }

    fn remove(inner: &mut Inner, id: &str) {
        if let Some(slot) = inner.slots.remove(id) {
            if let Storage::Resident { bytes, .. } = *slot.storage {
                inner.used_bytes -= bytes;
            }
        }
    }

    /// Builtin handles by name, then live uploads oldest first.
    pub fn list(&self) -> Vec<SpaceHandle> {
        let mut inner = self.inner.write().unwrap();
        Self::sweep(&mut inner, Instant::now());
        let mut slots: Vec<&Slot> = inner.slots.values().collect();
        slots.sort_by_key(|s| match *s.storage {
            Storage::Lazy { .. } => (0, 0, s.handle.name.clone()),
            Storage::Resident { seq, .. } => (1, seq, String::new()),
        });
        slots.into_iter().map(|s| s.handle.clone()).collect()
    }

    pub fn handle(&self, id: &str) -> ApiResult<SpaceHandle> {
        self.slot(id).map(|(h, _)| h)
    }

    fn slot(&self, id: &str) -> ApiResult<(SpaceHandle, Arc<Storage>)> {
        let now = Instant::now();
        {
            let inner = self.inner.read().unwrap();
            match inner.slots.get(id) {
                None => return Err(ApiError::not_found("space", id)),
                Some(slot) => match *slot.storage {
                    Storage::Resident { expires, .. } if expires <= now => {}
                    _ => return Ok((slot.handle.clone(), slot.storage.clone())),
                },
            }
        }
        Self::remove(&mut self.inner.write().unwrap(), id);
        Err(ApiError::not_found("space", id))
    }

    /// Returns the space, reading bundled files on first use. Blocking.
    pub fn space(&self, id: &str) -> ApiResult<Arc<EmbeddingSpace>> {
        let (_, storage) = self.slot(id)?;
        match &*storage {
            Storage::Resident { space, .. } => Ok(space.clone()),
            Storage::Lazy { entry, loaded } => {
                let mut guard = loaded.lock().unwrap();
                if let Some(space) = &*guard {
                    return Ok(space.clone());
                }
                let space = Arc::new(entry.load()?);
                *guard = Some(space.clone());
                Ok(space)
            }
        }
    }

    /// Loads every bundled space now.
    pub fn preload(&self) -> ApiResult<()> {
        let ids: Vec<String> = self
            .list()
            .into_iter()
            .filter(|h| h.origin == Origin::Builtin)
            .map(|h| h.id)
            .collect();
        for id in ids {
            self.space(&id)?;
        }
        Ok(())
    }

    /// Registers a space, evicting the oldest uploads if the memory budget
    /// would otherwise be exceeded.
    pub fn insert(&self, space: EmbeddingSpace) -> ApiResult<SpaceHandle> {
        let bytes = space.byte_size();
        if bytes > self.memory_cap {
            return Err(ApiError::too_large(format!(
                "space needs {bytes} bytes, the server keeps at most {}",
                self.memory_cap
            )));
        }
        let now = Instant::now();
        let mut inner = self.inner.write().unwrap();
        Self::sweep(&mut inner, now);
        while inner.used_bytes + bytes > self.memory_cap {
            let oldest = inner
                .slots
                .iter()
                .filter_map(|(id, s)| match *s.storage {
                    Storage::Resident { seq, .. } => Some((seq, id.clone())),
                    Storage::Lazy { .. } => None,
                })
                .min();
            match oldest {
                Some((_, id)) => {
                    tracing::info!(%id, "evicting space to stay under memory cap");
                    Self::remove(&mut inner, &id);
                }
                None => break,
            }
        }
        let handle = SpaceHandle {
            id: uuid::Uuid::new_v4().simple().to_string(),
            name: space.name().to_string(),
            dim: space.dim(),
            vocab_size: space.len(),
            origin: Origin::Uploaded,
            created_at: unix_now(),
        };
        let seq = inner.next_seq;
        inner.next_seq += 1;
        inner.used_bytes += bytes;
        inner.slots.insert(
            handle.id.clone(),
            Slot {
                handle: handle.clone(),
                storage: Arc::new(Storage::Resident {
                    space: Arc::new(space),
                    expires: now + self.ttl,
                    bytes,
                    seq,
                }),
            },
        );
        Ok(handle)
    }

    #[cfg(test)]
    fn used_bytes(&self) -> usize {
        self.inner.read().unwrap().used_bytes
    }
}
