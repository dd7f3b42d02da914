use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::index::{DocVector, TermSpace, TfIdfIndex};

/// Versioned magic for the on-disk index format.
const MAGIC: &[u8; 6] = b"PRIDX1";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("not a para-rank index")]
    BadMagic,
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error("index io failed: {0}")]
    Io(#[from] std::io::Error),
}

impl TfIdfIndex {
    /// Serializes the index: magic header, term space, document
    /// frequencies, then per-document sparse vectors as
    /// (term-id, weight) pairs with weights as little-endian f64.
    /// Entry order is preserved exactly so that reloaded indexes
    /// reproduce retrieval scores bit for bit.
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), PersistError> {
        w.write_all(MAGIC)?;
        w.write_u8(self.ngram_max as u8)?;
        match &self.space {
            TermSpace::Explicit { terms, df, .. } => {
                w.write_u8(0)?;
                w.write_u64::<LittleEndian>(self.docs.len() as u64)?;
                w.write_u64::<LittleEndian>(terms.len() as u64)?;
                for term in terms {
                    write_str(&mut w, term)?;
                }
                for &d in df {
                    w.write_u64::<LittleEndian>(d)?;
                }
            }
            TermSpace::Hashed { bits, df } => {
                w.write_u8(*bits as u8)?;
                w.write_u64::<LittleEndian>(self.docs.len() as u64)?;
                w.write_u64::<LittleEndian>(df.len() as u64)?;
                let mut bins: Vec<(u32, u64)> = df.iter().map(|(&b, &d)| (b, d)).collect();
                bins.sort_unstable();
                for (bin, d) in bins {
                    w.write_u32::<LittleEndian>(bin)?;
                    w.write_u64::<LittleEndian>(d)?;
                }
            }
        }
        for doc in &self.docs {
            write_str(&mut w, &doc.doc_id)?;
            w.write_u64::<LittleEndian>(doc.entries.len() as u64)?;
            for &(id, weight) in &doc.entries {
                w.write_u32::<LittleEndian>(id)?;
                w.write_f64::<LittleEndian>(weight)?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<TfIdfIndex, PersistError> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic).map_err(|_| PersistError::BadMagic)?;
        if &magic != MAGIC {
            return Err(PersistError::BadMagic);
        }
        let ngram_max = r.read_u8()? as usize;
        if !(1..=2).contains(&ngram_max) {
            return Err(PersistError::Corrupt(format!(
                "unsupported ngram order {ngram_max}"
            )));
        }
        let hash_bits = u32::from(r.read_u8()?);
        let doc_count = r.read_u64::<LittleEndian>()? as usize;

        let space = if hash_bits == 0 {
            let term_count = r.read_u64::<LittleEndian>()? as usize;
            let mut terms = Vec::with_capacity(term_count);
            let mut ids = HashMap::with_capacity(term_count);
            for i in 0..term_count {
                let term = read_str(&mut r)?;
                ids.insert(term.clone(), i as u32);
                terms.push(term);
            }
            let mut df = Vec::with_capacity(term_count);
            for _ in 0..term_count {
                df.push(r.read_u64::<LittleEndian>()?);
            }
            TermSpace::Explicit { terms, ids, df }
        } else {
            let nnz = r.read_u64::<LittleEndian>()? as usize;
            let mut df = HashMap::with_capacity(nnz);
            for _ in 0..nnz {
                let bin = r.read_u32::<LittleEndian>()?;
                let d = r.read_u64::<LittleEndian>()?;
                df.insert(bin, d);
            }
            TermSpace::Hashed {
                bits: hash_bits,
                df,
            }
        };

        let mut docs = Vec::with_capacity(doc_count);
        for _ in 0..doc_count {
            let doc_id = read_str(&mut r)?;
            let nnz = r.read_u64::<LittleEndian>()? as usize;
            let mut entries = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let id = r.read_u32::<LittleEndian>()?;
                let weight = r.read_f64::<LittleEndian>()?;
                entries.push((id, weight));
            }
            docs.push(DocVector { doc_id, entries });
        }

        Ok(TfIdfIndex {
            space,
            ngram_max,
            docs,
        })
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<(), PersistError> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        self.save(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<TfIdfIndex, PersistError> {
        let file = File::open(path)?;
        TfIdfIndex::load(BufReader::new(file))
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<(), PersistError> {
    w.write_u64::<LittleEndian>(s.len() as u64)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R) -> Result<String, PersistError> {
    let len = r.read_u64::<LittleEndian>()? as usize;
    if len > (1 << 30) {
        return Err(PersistError::Corrupt(format!("string length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| PersistError::Corrupt("non-utf8 string".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retriever::{Corpus, DocRecord, IndexOptions};
    use crate::text::tokenize;

    fn sample_index(hash_bits: u32) -> (Corpus, TfIdfIndex) {
        let records = vec![
            DocRecord {
                id: "d1".into(),
                title: "one".into(),
                paragraphs: vec!["alpha beta gamma".into(), "beta beta".into()],
            },
            DocRecord {
                id: "d2".into(),
                title: "two".into(),
                paragraphs: vec!["gamma delta".into()],
            },
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let index = TfIdfIndex::build(&corpus, IndexOptions { ngram_max: 2, hash_bits }).unwrap();
        (corpus, index)
    }

    #[test]
    fn round_trip_reproduces_scores_bit_identically() {
        for hash_bits in [0, 16] {
            let (_, index) = sample_index(hash_bits);
            let mut buf = Vec::new();
            index.save(&mut buf).unwrap();
            let reloaded = TfIdfIndex::load(buf.as_slice()).unwrap();
            assert_eq!(index, reloaded);
            for query in ["alpha beta", "gamma", "beta beta gamma delta"] {
                let a = index.retrieve(&tokenize(query), 10);
                let b = reloaded.retrieve(&tokenize(query), 10);
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b.iter()) {
                    assert_eq!(x.doc_index, y.doc_index);
                    assert_eq!(x.score.to_bits(), y.score.to_bits(), "scores must be bit-equal");
                }
            }
        }
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let err = TfIdfIndex::load(&b"NOTIDX-rest-of-file"[..]).unwrap_err();
        assert_eq!(err.to_string(), "not a para-rank index");
    }

    #[test]
    fn truncated_file_is_an_io_error() {
        let (_, index) = sample_index(0);
        let mut buf = Vec::new();
        index.save(&mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        assert!(TfIdfIndex::load(buf.as_slice()).is_err());
    }
}
