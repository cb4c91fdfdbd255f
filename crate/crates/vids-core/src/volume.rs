//! Minimal reader/writer for single-file gzip-compressed NIfTI-1 volumes.
//!
//! Scope is deliberately narrow: 3-D uint8 label masks and small synthetic
//! images. The writer always emits little-endian datatype 2 (uint8) with a
//! 348-byte header, 4 padding bytes, and voxel data at offset 352; the reader
//! additionally accepts datatype 4 (int16, saturated to uint8) and byte
//! swapped headers. Orientation is written as identity scaled by spacing and
//! ignored on read; agreement math needs only the voxel grid.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::{Compression, GzBuilder};

use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;
const DATA_OFFSET: usize = 352;
const MAGIC: &[u8; 4] = b"n+1\0";

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;

/// A 3-D voxel grid of unsigned 8-bit labels.
///
/// Voxels are stored with x fastest: index = x + nx*(y + ny*z), matching the
/// on-disk NIfTI order. Binary masks use values 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    dims: (u32, u32, u32),
    spacing: (f32, f32, f32),
    voxels: Vec<u8>,
}

impl LabelVolume {
    pub fn new(dims: (u32, u32, u32), spacing: (f32, f32, f32), voxels: Vec<u8>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(Error::BadConfig(format!("volume dims must be positive, got {dims:?}")));
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
            return Err(Error::BadConfig(format!(
                "voxel spacing must be positive, got {spacing:?}"
            )));
        }
        let expected = dims.0 as usize * dims.1 as usize * dims.2 as usize;
        if voxels.len() != expected {
            return Err(Error::BadConfig(format!(
                "voxel buffer length {} does not match dims {:?} ({} voxels)",
                voxels.len(),
                dims,
                expected
            )));
        }
        Ok(LabelVolume {
            dims,
            spacing,
            voxels,
        })
    }

    /// All-zero volume.
    pub fn zeros(dims: (u32, u32, u32), spacing: (f32, f32, f32)) -> Result<Self> {
        let len = dims.0 as usize * dims.1 as usize * dims.2 as usize;
        Self::new(dims, spacing, vec![0; len])
    }

    pub fn dims(&self) -> (u32, u32, u32) {
        self.dims
    }

    pub fn spacing(&self) -> (f32, f32, f32) {
        self.spacing
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }

    pub fn voxels_mut(&mut self) -> &mut [u8] {
        &mut self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32, z: u32) -> usize {
        debug_assert!(x < self.dims.0 && y < self.dims.1 && z < self.dims.2);
        (x as usize) + (self.dims.0 as usize) * ((y as usize) + (self.dims.1 as usize) * z as usize)
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32, z: u32) -> u8 {
        self.voxels[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, z: u32, value: u8) {
        let i = self.index(x, y, z);
        self.voxels[i] = value;
    }

    /// Count of nonzero voxels.
    pub fn nonzero_count(&self) -> usize {
        self.voxels.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_binary(&self) -> bool {
        self.voxels.iter().all(|&v| v <= 1)
    }
}

/// Parsed NIfTI-1 header fields this toolkit cares about.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHeader {
    pub dims: (u32, u32, u32),
    pub datatype_code: i16,
    pub bitpix: i16,
    pub spacing: (f32, f32, f32),
    pub data_offset: usize,
}

/// Result of reading a volume. `converted_from_int16` flags datatype-4 files
/// whose samples were saturated into the uint8 range for mask use.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedVolume {
    pub volume: LabelVolume,
    pub converted_from_int16: bool,
}

fn gunzip(path: &Path) -> Result<Vec<u8>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    if n < 2 || magic != [0x1f, 0x8b] {
        return Err(Error::NotGzip { path: path.into() });
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = flate2::read::GzDecoder::new(file);
    let mut raw = Vec::new();
    decoder
        .read_to_end(&mut raw)
        .map_err(|e| Error::io(path, e))?;
    Ok(raw)
}

fn parse_header(raw: &[u8], path: &Path) -> Result<(VolumeHeader, bool)> {
    let bad = || Error::BadMagic { path: path.into() };
    if raw.len() < HEADER_SIZE {
        return Err(bad());
    }
    let little_endian = match LittleEndian::read_i32(&raw[0..4]) {
        348 => true,
        _ if BigEndian::read_i32(&raw[0..4]) == 348 => false,
        _ => return Err(bad()),
    };
    if &raw[344..348] != MAGIC {
        return Err(bad());
    }

    let read_i16 = |off: usize| -> i16 {
        if little_endian {
            LittleEndian::read_i16(&raw[off..off + 2])
        } else {
            BigEndian::read_i16(&raw[off..off + 2])
        }
    };
    let read_f32 = |off: usize| -> f32 {
        if little_endian {
            LittleEndian::read_f32(&raw[off..off + 4])
        } else {
            BigEndian::read_f32(&raw[off..off + 4])
        }
    };

    let ndim = read_i16(40);
    if !(1..=7).contains(&ndim) {
        return Err(bad());
    }
    let mut dim = [1i16; 7];
    for (i, d) in dim.iter_mut().enumerate().take(ndim as usize) {
        *d = read_i16(42 + i * 2);
        if *d < 1 {
            return Err(bad());
        }
    }
    // Only single 3-D volumes are supported; trailing dims must be 1.
    if dim[3..].iter().any(|&d| d > 1) {
        return Err(bad());
    }
    let dims = (dim[0] as u32, dim[1] as u32, dim[2] as u32);

    let datatype_code = read_i16(70);
    let bitpix = read_i16(72);
    let expected_bitpix = match datatype_code {
        DT_UINT8 => 8,
        DT_INT16 => 16,
        code => {
            return Err(Error::UnsupportedDatatype {
                path: path.into(),
                code,
            })
        }
    };
    if bitpix != expected_bitpix {
        return Err(bad());
    }

    let spacing = (read_f32(80), read_f32(84), read_f32(88));
    for s in [spacing.0, spacing.1, spacing.2] {
        if !(s.is_finite() && s > 0.0) {
            return Err(bad());
        }
    }

    let vox_offset = read_f32(108);
    if !vox_offset.is_finite() || vox_offset.fract() != 0.0 || (vox_offset as usize) < DATA_OFFSET {
        return Err(bad());
    }

    Ok((
        VolumeHeader {
            dims,
            datatype_code,
            bitpix,
            spacing,
            data_offset: vox_offset as usize,
        },
        little_endian,
    ))
}

/// Reads a gzip-compressed NIfTI-1 volume.
///
/// Accepts datatype 2 (uint8) directly and datatype 4 (int16) by saturating
/// each sample into [0, 255].
pub fn read_volume(path: impl AsRef<Path>) -> Result<LoadedVolume> {
    let path = path.as_ref();
    let raw = gunzip(path)?;
    let (header, little_endian) = parse_header(&raw, path)?;

    let (nx, ny, nz) = header.dims;
    let n_voxels = nx as usize * ny as usize * nz as usize;
    let bytes_per = (header.bitpix / 8) as usize;
    let needed = n_voxels * bytes_per;
    let available = raw.len().saturating_sub(header.data_offset);
    if available < needed {
        return Err(Error::TruncatedData {
            path: path.into(),
            expected: needed,
            actual: available,
        });
    }
    let data = &raw[header.data_offset..header.data_offset + needed];

    let (voxels, converted) = match header.datatype_code {
        DT_UINT8 => (data.to_vec(), false),
        DT_INT16 => {
            let mut out = Vec::with_capacity(n_voxels);
            for chunk in data.chunks_exact(2) {
                let v = if little_endian {
                    LittleEndian::read_i16(chunk)
                } else {
                    BigEndian::read_i16(chunk)
                };
                out.push(v.clamp(0, 255) as u8);
            }
            (out, true)
        }
        _ => unreachable!("parse_header restricts datatype codes"),
    };

    Ok(LoadedVolume {
        volume: LabelVolume::new(header.dims, header.spacing, voxels)?,
        converted_from_int16: converted,
    })
}

fn encode_header(v: &LabelVolume) -> [u8; HEADER_SIZE] {
    let mut hdr = [0u8; HEADER_SIZE];
    LittleEndian::write_i32(&mut hdr[0..4], HEADER_SIZE as i32);
    LittleEndian::write_i16(&mut hdr[40..42], 3);
    LittleEndian::write_i16(&mut hdr[42..44], v.dims.0 as i16);
    LittleEndian::write_i16(&mut hdr[44..46], v.dims.1 as i16);
    LittleEndian::write_i16(&mut hdr[46..48], v.dims.2 as i16);
    for off in (48..56).step_by(2) {
        LittleEndian::write_i16(&mut hdr[off..off + 2], 1);
    }
    LittleEndian::write_i16(&mut hdr[70..72], DT_UINT8);
    LittleEndian::write_i16(&mut hdr[72..74], 8);
    LittleEndian::write_f32(&mut hdr[76..80], 1.0); // qfac
    LittleEndian::write_f32(&mut hdr[80..84], v.spacing.0);
    LittleEndian::write_f32(&mut hdr[84..88], v.spacing.1);
    LittleEndian::write_f32(&mut hdr[88..92], v.spacing.2);
    LittleEndian::write_f32(&mut hdr[108..112], DATA_OFFSET as f32);
    LittleEndian::write_f32(&mut hdr[112..116], 1.0); // scl_slope
    hdr[123] = 2; // xyzt_units: millimeters
    LittleEndian::write_i16(&mut hdr[254..256], 1); // sform_code
    // Identity orientation scaled by spacing.
    LittleEndian::write_f32(&mut hdr[280..284], v.spacing.0);
    LittleEndian::write_f32(&mut hdr[300..304], v.spacing.1);
    LittleEndian::write_f32(&mut hdr[320..324], v.spacing.2);
    hdr[344..348].copy_from_slice(MAGIC);
    hdr
}

/// Writes a volume as gzip-compressed NIfTI-1 (datatype 2, little-endian).
///
/// Output bytes are deterministic: the gzip mtime field is pinned to zero.
pub fn write_volume(v: &LabelVolume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if v.dims.0 > i16::MAX as u32 || v.dims.1 > i16::MAX as u32 || v.dims.2 > i16::MAX as u32 {
        return Err(Error::BadConfig(format!(
            "dims {:?} exceed the NIfTI-1 16-bit limit",
            v.dims
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = GzBuilder::new()
        .mtime(0)
        .write(file, Compression::default());
    encoder
        .write_all(&encode_header(v))
        .and_then(|_| encoder.write_all(&[0u8; 4]))
        .and_then(|_| encoder.write_all(&v.voxels))
        .and_then(|_| encoder.finish().map(drop))
        .map_err(|e| Error::io(path, e))
}
