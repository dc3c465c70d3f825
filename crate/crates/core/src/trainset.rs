//! Training set of paired low/high-resolution detail coefficients.
//!
//! Records are grouped by the best direction pair of their low-resolution
//! patch and searched by minimum absolute difference within one group.
//!
//! File layout (little-endian):
//!
//! ```text
//! "DSR1" | u32 version | u32 q | u32 lr_patch | u32 hr_patch
//! | 8-byte filter id, space padded | u8 mode (1 oversampled, 0 critical)
//! | u32 group count (5)
//! per group, canonical order: u32 count, then records
//!   record: u32 image | u32 patch row | u32 patch col
//!           | lr details (f64, bands HL HH VL VH DL DH, row-major)
//!           | hr details (f64, same order)
//! u64 record total | u32 CRC-32 of every preceding byte
//! ```

use std::io::{Read, Write};

use crate::degrade::decimate;
use crate::directionlet::{band_shape, best_direction, forward_awt21};
use crate::error::{Error, LoadError, Result};
use crate::filterbank::{daub4, Mode};
use crate::image::{energy_with_offset, extract_patches, pad_to_multiple, Image, Patch, ENERGY_OFFSET};
use crate::lattice::{canonical_pairs, DirectionPair};

pub const MAGIC: &[u8; 4] = b"DSR1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 4 + 8 + 1 + 4;
const TRAILER_LEN: usize = 8 + 4;
const GROUPS: usize = 5;

/// Where a record came from: corpus index and patch grid position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RecordSource {
    pub image: u32,
    pub patch_row: u32,
    pub patch_col: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingRecord {
    pub source: RecordSource,
    /// Normalized low-resolution detail coefficients.
    pub lr_details: Vec<f64>,
    /// Normalized high-resolution detail coefficients.
    pub hr_details: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMeta {
    pub version: u32,
    pub q: u32,
    pub lr_patch: u32,
    pub hr_patch: u32,
    pub filter_id: String,
    pub mode: Mode,
    pub image_count: u32,
    pub record_count: u64,
}

impl TrainingMeta {
    /// Detail coefficients per record on the low- and high-resolution side.
    pub fn record_lens(&self) -> (usize, usize) {
        (
            detail_len(self.lr_patch as usize, self.mode),
            detail_len(self.hr_patch as usize, self.mode),
        )
    }
}

fn detail_len(n: usize, mode: Mode) -> usize {
    let (r, c) = band_shape(n, mode);
    6 * r * c
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub meta: TrainingMeta,
    groups: [Vec<TrainingRecord>; GROUPS],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildConfig {
    pub q: usize,
    pub lr_patch: usize,
    pub mode: Mode,
    /// Additive floor of the contrast energy; only tests change it.
    pub energy_offset: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            q: 2,
            lr_patch: 4,
            mode: Mode::Oversampled,
            energy_offset: ENERGY_OFFSET,
        }
    }
}

impl BuildConfig {
    pub fn hr_patch(&self) -> usize {
        self.q * self.lr_patch
    }
}

impl TrainingSet {
    /// Empty set with the metadata of `cfg`.
    pub fn empty(cfg: &BuildConfig) -> Self {
        Self::from_groups(cfg, Default::default())
    }

    fn from_groups(cfg: &BuildConfig, groups: [Vec<TrainingRecord>; GROUPS]) -> Self {
        let meta = TrainingMeta {
            version: FORMAT_VERSION,
            q: cfg.q as u32,
            lr_patch: cfg.lr_patch as u32,
            hr_patch: cfg.hr_patch() as u32,
            filter_id: daub4().id.to_string(),
            mode: cfg.mode,
            image_count: 0,
            record_count: 0,
        };
        let mut ts = Self { meta, groups };
        ts.refresh_counts();
        ts
    }

    fn refresh_counts(&mut self) {
        self.meta.record_count = self.groups.iter().map(|g| g.len() as u64).sum();
        self.meta.image_count = self
            .groups
            .iter()
            .flatten()
            .map(|r| r.source.image + 1)
            .max()
            .unwrap_or(0);
    }

    pub fn group(&self, pair: DirectionPair) -> &[TrainingRecord] {
        match pair.canonical_index() {
            Some(i) => &self.groups[i],
            None => &[],
        }
    }

    /// Groups in canonical pair order.
    pub fn groups(&self) -> impl Iterator<Item = (DirectionPair, &[TrainingRecord])> {
        canonical_pairs().into_iter().zip(self.groups.iter().map(Vec::as_slice))
    }

    pub fn record_count(&self) -> u64 {
        self.meta.record_count
    }

    /// Appends a record to the group of `pair`.
    pub fn push(&mut self, pair: DirectionPair, record: TrainingRecord) -> Result<()> {
        let idx = pair
            .canonical_index()
            .ok_or_else(|| Error::Precondition(format!("{} is not a canonical pair", pair.label())))?;
        let (lr, hr) = self.meta.record_lens();
        if record.lr_details.len() != lr || record.hr_details.len() != hr {
            return Err(Error::Shape(format!(
                "record needs {lr}+{hr} coefficients, got {}+{}",
                record.lr_details.len(),
                record.hr_details.len()
            )));
        }
        self.groups[idx].push(record);
        self.refresh_counts();
        Ok(())
    }
}

/// Normalized low/high-resolution detail coefficients of one patch pair
/// along the best direction of the low-resolution patch.
pub(crate) fn describe_pair(
    lr: &Patch,
    hr: &Patch,
    mode: Mode,
    energy_offset: f64,
) -> Result<(DirectionPair, Vec<f64>, Vec<f64>)> {
    let energy = energy_with_offset(lr.values(), energy_offset);
    let (lr_n, hr_n) = if energy > 0.0 {
        (lr.divided(energy), hr.divided(energy))
    } else {
        (lr.clone(), hr.clone())
    };
    let (pair, _) = best_direction(&lr_n)?;
    let lr_details = forward_awt21(&lr_n, pair, mode)?.detail_coefficients();
    let hr_details = forward_awt21(&hr_n, pair, mode)?.detail_coefficients();
    Ok((pair, lr_details, hr_details))
}

/// Decimates every corpus image by `q`, tiles both resolutions in raster
/// order and stores the normalized detail bands of each patch pair.
pub fn build_training_set(corpus: &[Image], cfg: &BuildConfig) -> Result<TrainingSet> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if cfg.q < 1 || cfg.lr_patch == 0 {
        return Err(Error::Precondition("decimation factor and patch size must be positive".into()));
    }
    let mut groups: [Vec<TrainingRecord>; GROUPS] = Default::default();
    for (id, img) in corpus.iter().enumerate() {
        let (hr, _) = pad_to_multiple(img, cfg.hr_patch());
        let lr = decimate(&hr, cfg.q)?;
        let lr_grid = extract_patches(&lr, cfg.lr_patch)?;
        let hr_grid = extract_patches(&hr, cfg.hr_patch())?;
        for (idx, (lp, hp)) in lr_grid.patches.iter().zip(&hr_grid.patches).enumerate() {
            let (pair, lr_details, hr_details) = describe_pair(lp, hp, cfg.mode, cfg.energy_offset)?;
            let g = pair.canonical_index().expect("best pair is canonical");
            groups[g].push(TrainingRecord {
                source: RecordSource {
                    image: id as u32,
                    patch_row: (idx / lr_grid.cols) as u32,
                    patch_col: (idx % lr_grid.cols) as u32,
                },
                lr_details,
                hr_details,
            });
        }
    }
    Ok(TrainingSet::from_groups(cfg, groups))
}

/// Result of a minimum-absolute-difference search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MadMatch {
    /// Index within the searched slice.
    pub index: usize,
    pub distance: f64,
}

/// `Σ|a − b|`, abandoning once the partial sum reaches `bound`.
#[inline]
fn l1_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    let mut acc = 0.0;
    for (ca, cb) in a.chunks(16).zip(b.chunks(16)) {
        for (x, y) in ca.iter().zip(cb) {
            acc += (x - y).abs();
        }
        // partial sums of non-negative terms never decrease, so this record cannot win
        if acc >= bound {
            return acc;
        }
    }
    acc
}

/// Linear scan for the record whose low-resolution details are closest to
/// `probe` in L1; the earliest record wins ties.
pub fn mad_scan(records: &[TrainingRecord], probe: &[f64]) -> Option<MadMatch> {
    let mut best: Option<MadMatch> = None;
    for (index, rec) in records.iter().enumerate() {
        let bound = best.map_or(f64::INFINITY, |m| m.distance);
        let distance = l1_bounded(probe, &rec.lr_details, bound);
        if distance < bound {
            best = Some(MadMatch { index, distance });
        }
    }
    best
}

/// Searches only the group of `pair`; `None` when that group is empty.
pub fn query_mad<'a>(
    ts: &'a TrainingSet,
    pair: DirectionPair,
    probe: &[f64],
) -> Option<(&'a TrainingRecord, MadMatch)> {
    let group = ts.group(pair);
    mad_scan(group, probe).map(|m| (&group[m.index], m))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Serializes `ts` into the on-disk layout.
pub fn to_bytes(ts: &TrainingSet) -> Vec<u8> {
    let (lr, hr) = ts.meta.record_lens();
    let mut out = Vec::with_capacity(
        HEADER_LEN + GROUPS * 4 + ts.meta.record_count as usize * (12 + 8 * (lr + hr)) + TRAILER_LEN,
    );
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, ts.meta.version);
    put_u32(&mut out, ts.meta.q);
    put_u32(&mut out, ts.meta.lr_patch);
    put_u32(&mut out, ts.meta.hr_patch);
    let mut id = [b' '; 8];
    let name = ts.meta.filter_id.as_bytes();
    id[..name.len().min(8)].copy_from_slice(&name[..name.len().min(8)]);
    out.extend_from_slice(&id);
    out.push(match ts.meta.mode {
        Mode::Oversampled => 1,
        Mode::Critical => 0,
    });
    put_u32(&mut out, GROUPS as u32);
    for group in &ts.groups {
        put_u32(&mut out, group.len() as u32);
        for rec in group {
            put_u32(&mut out, rec.source.image);
            put_u32(&mut out, rec.source.patch_row);
            put_u32(&mut out, rec.source.patch_col);
            for v in rec.lr_details.iter().chain(&rec.hr_details) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out.extend_from_slice(&ts.meta.record_count.to_le_bytes());
    let crc = crc32fast::hash(&out);
    put_u32(&mut out, crc);
    out
}

pub fn save<W: Write>(ts: &TrainingSet, mut sink: W) -> Result<()> {
    sink.write_all(&to_bytes(ts))?;
    Ok(())
}

pub fn load<R: Read>(mut source: R) -> Result<TrainingSet> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(from_bytes(&bytes)?)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

enum Walk {
    PastEnd(usize),
    Bad(String),
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], Walk> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Walk::PastEnd(end));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, Walk> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, Walk> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, Walk> {
        Ok(self
            .take(8 * n)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn parse(bytes: &[u8]) -> std::result::Result<TrainingSet, Walk> {
    let mut rd = Reader { bytes, pos: 8 };
    let q = rd.u32()?;
    let lr_patch = rd.u32()?;
    let hr_patch = rd.u32()?;
    let filter_id = String::from_utf8_lossy(rd.take(8)?).trim_end().to_string();
    let mode = match rd.take(1)?[0] {
        1 => Mode::Oversampled,
        0 => Mode::Critical,
        m => return Err(Walk::Bad(format!("unknown mode byte {m}"))),
    };
    let group_count = rd.u32()?;
    if group_count as usize != GROUPS {
        return Err(Walk::Bad(format!("expected {GROUPS} groups, found {group_count}")));
    }
    if q == 0 || lr_patch == 0 || hr_patch != q * lr_patch {
        return Err(Walk::Bad(format!(
            "inconsistent patch geometry q={q} lr={lr_patch} hr={hr_patch}"
        )));
    }
    let mut meta = TrainingMeta {
        version: FORMAT_VERSION,
        q,
        lr_patch,
        hr_patch,
        filter_id,
        mode,
        image_count: 0,
        record_count: 0,
    };
    let (lr_len, hr_len) = meta.record_lens();
    let record_bytes = 12 + 8 * (lr_len + hr_len);
    let mut groups: [Vec<TrainingRecord>; GROUPS] = Default::default();
    for group in &mut groups {
        let count = rd.u32()? as usize;
        // bound the allocation by what the file can actually hold
        let available = bytes.len().saturating_sub(rd.pos) / record_bytes;
        if count > available {
            return Err(Walk::PastEnd(rd.pos + count * record_bytes));
        }
        group.reserve_exact(count);
        for _ in 0..count {
            let source = RecordSource {
                image: rd.u32()?,
                patch_row: rd.u32()?,
                patch_col: rd.u32()?,
            };
            group.push(TrainingRecord {
                source,
                lr_details: rd.f64s(lr_len)?,
                hr_details: rd.f64s(hr_len)?,
            });
        }
    }
    let total = rd.u64()?;
    rd.take(4)?;
    if rd.pos != bytes.len() {
        return Err(Walk::Bad(format!("{} trailing bytes", bytes.len() - rd.pos)));
    }
    let counted: u64 = groups.iter().map(|g| g.len() as u64).sum();
    if total != counted {
        return Err(Walk::Bad(format!("trailer says {total} records, groups hold {counted}")));
    }
    meta.record_count = counted;
    let mut ts = TrainingSet { meta, groups };
    ts.refresh_counts();
    Ok(ts)
}

/// Decodes the on-disk layout, distinguishing bad magic, version mismatch,
/// truncation and checksum failures.
pub fn from_bytes(bytes: &[u8]) -> std::result::Result<TrainingSet, LoadError> {
    if bytes.len() < MAGIC.len() {
        return Err(LoadError::Truncated {
            needed: HEADER_LEN + TRAILER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(LoadError::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(LoadError::Truncated {
            needed: HEADER_LEN + TRAILER_LEN,
            found: bytes.len(),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(LoadError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let crc = (bytes.len() >= HEADER_LEN + TRAILER_LEN).then(|| {
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        (u32::from_le_bytes(tail.try_into().unwrap()), crc32fast::hash(body))
    });
    let crc_ok = matches!(crc, Some((stored, computed)) if stored == computed);
    let checksum_error = || {
        let (stored, computed) = crc.expect("length checked");
        LoadError::Checksum { stored, computed }
    };
    match parse(bytes) {
        Ok(ts) if crc_ok => Ok(ts),
        Ok(_) => Err(checksum_error()),
        Err(Walk::PastEnd(needed)) if !crc_ok => Err(LoadError::Truncated {
            needed,
            found: bytes.len(),
        }),
        Err(Walk::Bad(_)) if !crc_ok && crc.is_some() => Err(checksum_error()),
        Err(Walk::PastEnd(needed)) => Err(LoadError::Malformed(format!(
            "structure needs {needed} bytes but checksum covers {}",
            bytes.len()
        ))),
        Err(Walk::Bad(msg)) => Err(LoadError::Malformed(msg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(image: u32, seed: f64) -> TrainingRecord {
        TrainingRecord {
            source: RecordSource {
                image,
                patch_row: 1,
                patch_col: 2,
            },
            lr_details: (0..96).map(|i| (i as f64 * seed).sin()).collect(),
            hr_details: (0..384).map(|i| (i as f64 * seed).cos()).collect(),
        }
    }

    #[test]
    fn constant_image_single_record() {
        let ts = build_training_set(&[Image::filled(8, 8, 0.4)], &BuildConfig::default()).unwrap();
        assert_eq!(ts.record_count(), 1);
        let group = ts.group(canonical_pairs()[0]);
        assert_eq!(group.len(), 1);
        assert!(group[0]
            .lr_details
            .iter()
            .chain(&group[0].hr_details)
            .all(|v| v.abs() < 1e-14));
        assert_eq!(ts.meta.image_count, 1);
    }

    #[test]
    fn raster_provenance() {
        let img = Image::from_fn(16, 16, |r, c| ((r * 5 + c * 3) % 7) as f64 / 7.0);
        let ts = build_training_set(&[img], &BuildConfig::default()).unwrap();
        assert_eq!(ts.record_count(), 4);
        let mut sources: Vec<_> = ts.groups().flat_map(|(_, g)| g.iter().map(|r| r.source)).collect();
        sources.sort_by_key(|s| (s.patch_row, s.patch_col));
        let cells: Vec<_> = sources.iter().map(|s| (s.patch_row, s.patch_col)).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            build_training_set(&[], &BuildConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn round_trip_and_empty() {
        let cfg = BuildConfig::default();
        let empty = TrainingSet::empty(&cfg);
        assert_eq!(from_bytes(&to_bytes(&empty)).unwrap(), empty);

        let mut ts = TrainingSet::empty(&cfg);
        ts.push(canonical_pairs()[2], record(0, 0.3)).unwrap();
        ts.push(canonical_pairs()[4], record(3, 0.7)).unwrap();
        let bytes = to_bytes(&ts);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back, ts);
        assert_eq!(to_bytes(&back), bytes);
        assert_eq!(back.meta.image_count, 4);
        let mut sink = Vec::new();
        save(&ts, &mut sink).unwrap();
        assert_eq!(load(sink.as_slice()).unwrap(), ts);
    }

    #[test]
    fn distinct_load_errors() {
        let mut ts = TrainingSet::empty(&BuildConfig::default());
        ts.push(canonical_pairs()[0], record(0, 0.1)).unwrap();
        let bytes = to_bytes(&ts);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(from_bytes(&bad), Err(LoadError::BadMagic));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(from_bytes(&bad), Err(LoadError::VersionMismatch { found: 2, .. })));

        assert!(matches!(
            from_bytes(&bytes[..bytes.len() - 100]),
            Err(LoadError::Truncated { .. })
        ));
        assert!(matches!(from_bytes(&bytes[..6]), Err(LoadError::Truncated { .. })));

        let mut bad = bytes.clone();
        bad[HEADER_LEN + 4 + 12 + 5] ^= 0x10;
        assert!(matches!(from_bytes(&bad), Err(LoadError::Checksum { .. })));
    }

    #[test]
    fn header_layout() {
        let bytes = to_bytes(&TrainingSet::empty(&BuildConfig::default()));
        assert_eq!(&bytes[..4], b"DSR1");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &4u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &8u32.to_le_bytes());
        assert_eq!(&bytes[20..28], b"daub4   ");
        assert_eq!(bytes[28], 1);
        assert_eq!(&bytes[29..33], &5u32.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 5 * 4 + TRAILER_LEN);
    }

    #[test]
    fn query_examples() {
        let mut ts = TrainingSet::empty(&BuildConfig::default());
        let pair = canonical_pairs()[1];
        assert!(query_mad(&ts, pair, &[0.0; 96]).is_none());
        ts.push(pair, record(0, 0.2)).unwrap();
        ts.push(pair, record(1, 0.5)).unwrap();
        ts.push(pair, record(2, 0.5)).unwrap();
        let probe = record(9, 0.5).lr_details;
        let (rec, m) = query_mad(&ts, pair, &probe).unwrap();
        assert_eq!(m.distance, 0.0);
        assert_eq!(m.index, 1);
        assert_eq!(rec.source.image, 1);
        assert!(query_mad(&ts, canonical_pairs()[0], &probe).is_none());
    }

    #[test]
    fn push_rejects_wrong_lengths() {
        let mut ts = TrainingSet::empty(&BuildConfig::default());
        let mut r = record(0, 0.1);
        r.hr_details.pop();
        assert!(ts.push(canonical_pairs()[0], r).is_err());
    }
}
