//! Certificate image storage: a mutable web-server style store whose URIs
//! stay fixed across replacement, and a content-addressed store whose URIs
//! are `cas://` plus the SHA-256 of the bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::journal::Journal;

pub const CAS_SCHEME: &str = "cas://";
const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Mutable,
    ContentAddressed,
}

impl Backend {
    pub fn of_uri(uri: &str) -> Backend {
        if uri.starts_with(CAS_SCHEME) {
            Backend::ContentAddressed
        } else {
            Backend::Mutable
        }
    }

    fn name(self) -> &'static str {
        match self {
            Backend::Mutable => "mutable",
            Backend::ContentAddressed => "content-addressed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredObject {
    pub uri: String,
    pub bytes: Vec<u8>,
    pub content_type: String,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ManifestEntry {
    uri: String,
    object: String,
    backend: Backend,
    content_type: String,
    revoked: bool,
}

#[derive(Debug)]
pub struct Storage {
    root: Option<PathBuf>,
    base_url: String,
    entries: BTreeMap<String, ManifestEntry>,
    objects: BTreeMap<String, String>,
    memory: BTreeMap<String, Vec<u8>>,
    manifest: Option<Journal>,
    online: bool,
}

impl Storage {
    pub fn in_memory(base_url: impl Into<String>) -> Self {
        Storage {
            root: None,
            base_url: base_url.into(),
            entries: BTreeMap::new(),
            objects: BTreeMap::new(),
            memory: BTreeMap::new(),
            manifest: None,
            online: true,
        }
    }

    pub fn open(root: &Path, base_url: impl Into<String>) -> Result<Self> {
        for sub in ["web", "cas"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let (journal, log) = Journal::open::<ManifestEntry>(&root.join(MANIFEST_FILE))?;
        let mut storage = Storage::in_memory(base_url);
        storage.root = Some(root.to_path_buf());
        storage.manifest = Some(journal);
        for entry in log {
            storage.index(entry);
        }
        Ok(storage)
    }

    fn index(&mut self, entry: ManifestEntry) {
        if entry.backend == Backend::Mutable {
            self.objects.insert(entry.object.clone(), entry.uri.clone());
        }
        self.entries.insert(entry.uri.clone(), entry);
    }

    fn record(&mut self, entry: ManifestEntry) -> Result<()> {
        if let Some(journal) = self.manifest.as_mut() {
            journal.append(std::slice::from_ref(&entry))?;
        }
        self.index(entry);
        Ok(())
    }

    /// Simulates the institution's server going up or down.
    pub fn set_online(&mut self, online: bool) {
        self.online = online;
    }

    pub fn is_online(&self) -> bool {
        self.online
    }

    fn ensure_online(&self) -> Result<()> {
        if self.online {
            Ok(())
        } else {
            Err(Error::StoreUnavailable)
        }
    }

    pub fn blob_path(&self, uri: &str) -> Option<PathBuf> {
        let entry = self.entries.get(uri)?;
        let root = self.root.as_ref()?;
        Some(match entry.backend {
            Backend::Mutable => root.join("web").join(&entry.object),
            Backend::ContentAddressed => root.join("cas").join(&entry.object),
        })
    }

    fn write_blob(&mut self, uri: &str, bytes: &[u8]) -> Result<()> {
        match self.blob_path(uri) {
            Some(path) => {
                let tmp = path.with_extension("tmp");
                fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
                fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
            }
            None => {
                self.memory.insert(uri.to_string(), bytes.to_vec());
                Ok(())
            }
        }
    }

    fn read_blob(&self, uri: &str) -> Result<Vec<u8>> {
        match self.blob_path(uri) {
            Some(path) => fs::read(&path).map_err(|e| Error::io(&path, e)),
            None => self
                .memory
                .get(uri)
                .cloned()
                .ok_or_else(|| Error::not_found("object", uri)),
        }
    }

    pub fn put_image(&mut self, bytes: &[u8], content_type: &str, backend: Backend) -> Result<String> {
        self.ensure_online()?;
        if bytes.is_empty() {
            return Err(Error::InvalidInput("image payload must be non-empty".into()));
        }
        let content_type = if content_type.is_empty() {
            "application/octet-stream"
        } else {
            content_type
        };
        let (uri, object) = match backend {
            Backend::ContentAddressed => {
                let digest = hex::encode(Sha256::digest(bytes));
                let uri = format!("{CAS_SCHEME}{digest}");
                if self.entries.contains_key(&uri) {
                    return Ok(uri);
                }
                (uri, digest)
            }
            Backend::Mutable => {
                let object = format!("obj-{:06}", self.objects.len() + 1);
                let uri = format!("{}/certs/{object}", self.base_url.trim_end_matches('/'));
                (uri, object)
            }
        };
        let entry = ManifestEntry {
            uri: uri.clone(),
            object,
            backend,
            content_type: content_type.to_string(),
            revoked: false,
        };
        self.entries.insert(uri.clone(), entry.clone());
        if let Err(e) = self.write_blob(&uri, bytes) {
            self.entries.remove(&uri);
            return Err(e);
        }
        self.record(entry)?;
        Ok(uri)
    }

    pub fn get_by_uri(&self, uri: &str) -> Result<StoredObject> {
        self.ensure_online()?;
        let entry = self
            .entries
            .get(uri)
            .ok_or_else(|| Error::not_found("object", uri))?;
        let bytes = self.read_blob(uri)?;
        if entry.backend == Backend::ContentAddressed {
            let actual = hex::encode(Sha256::digest(&bytes));
            if actual != entry.object {
                return Err(Error::IntegrityViolation(format!(
                    "{uri} content hashes to {actual}"
                )));
            }
        }
        Ok(StoredObject {
            uri: uri.to_string(),
            bytes,
            content_type: entry.content_type.clone(),
            revoked: entry.revoked,
        })
    }

    /// Looks up a mutable-backend object by the last segment of its URI.
    pub fn get_object(&self, object: &str) -> Result<StoredObject> {
        let uri = self
            .objects
            .get(object)
            .ok_or_else(|| Error::not_found("object", object))?;
        self.get_by_uri(uri)
    }

    /// Replaces the bytes behind a mutable URI with a revocation notice.
    pub fn revoke_certificate(&mut self, uri: &str, notice: &[u8]) -> Result<()> {
        if Backend::of_uri(uri) == Backend::ContentAddressed {
            return Err(Error::UnsupportedBackend(Backend::ContentAddressed.name()));
        }
        self.ensure_online()?;
        if notice.is_empty() {
            return Err(Error::InvalidInput("revocation notice must be non-empty".into()));
        }
        let mut entry = self
            .entries
            .get(uri)
            .cloned()
            .ok_or_else(|| Error::not_found("object", uri))?;
        self.write_blob(uri, notice)?;
        entry.revoked = true;
        self.record(entry)
    }

    /// Content-addressed URIs can never be revoked and always report false.
    pub fn is_revoked(&self, uri: &str) -> Result<bool> {
        self.ensure_online()?;
        let entry = self
            .entries
            .get(uri)
            .ok_or_else(|| Error::not_found("object", uri))?;
        Ok(entry.revoked)
    }
}
