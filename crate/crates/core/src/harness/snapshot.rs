//! Binary field snapshots: a fixed little-endian header followed by row-major `f64` samples.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::GridField;

pub const MAGIC: &[u8; 4] = b"QSSF";
pub const VERSION: u16 = 1;
/// Bytes before the samples: magic, version, kind, resolution, time, level.
pub const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 8 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    Scalar = 0,
    Vector = 1,
}

impl SnapshotKind {
    fn comps(self) -> usize {
        match self {
            SnapshotKind::Scalar => 1,
            SnapshotKind::Vector => 2,
        }
    }
}

/// A field at one time and level. Vector components are stored one after the other.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub kind: SnapshotKind,
    pub time: f64,
    pub level: i32,
    pub field: GridField,
}

impl Snapshot {
    pub fn new(field: GridField, time: f64, level: i32) -> Result<Self> {
        let kind = match field.comps() {
            1 => SnapshotKind::Scalar,
            2 => SnapshotKind::Vector,
            c => return Err(Error::Snapshot(format!("cannot store a field with {c} components"))),
        };
        Ok(Snapshot { kind, time, level, field })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let res = u32::try_from(self.field.res()).map_err(|_| Error::Snapshot("resolution exceeds u32".into()))?;
        let mut buf = Vec::with_capacity(HEADER_LEN + 8 * self.field.data().len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(self.kind as u8);
        buf.extend_from_slice(&res.to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        buf.extend_from_slice(&self.level.to_le_bytes());
        for v in self.field.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut head = [0u8; HEADER_LEN];
        r.read_exact(&mut head).map_err(|e| Error::Snapshot(format!("short header: {e}")))?;
        if &head[0..4] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let kind = match head[6] {
            0 => SnapshotKind::Scalar,
            1 => SnapshotKind::Vector,
            k => return Err(Error::Snapshot(format!("unknown kind {k}"))),
        };
        let res = u32::from_le_bytes(head[7..11].try_into().expect("4 bytes")) as usize;
        let time = f64::from_le_bytes(head[11..19].try_into().expect("8 bytes"));
        let level = i32::from_le_bytes(head[19..23].try_into().expect("4 bytes"));
        let len = kind.comps() * res * res;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * len {
            return Err(Error::Snapshot(format!("expected {} sample bytes, found {}", 8 * len, body.len())));
        }
        let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Snapshot { kind, time, level, field: GridField::from_data(res, kind.comps(), data)? })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::read_from(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
