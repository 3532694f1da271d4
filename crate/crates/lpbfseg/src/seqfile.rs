//! On-disk formats: the frame-sequence container and the ground-truth
//! sidecar. Chosen over image-per-file directories so 60 Hz replay is a
//! single sequential read.
//!
//! # Sequence container
//!
//! Everything little-endian:
//!
//! ```text
//! magic        8 bytes  "LPBFSEQ1"
//! width        u32
//! height       u32
//! frame_count  u32
//! dtype        u8       1 = u16 raw counts, 2 = f32 degrees C
//! warmup_count u32
//! frames       frame_count * width * height values, row-major
//! ```
//!
//! # Ground-truth sidecar
//!
//! ```text
//! magic        8 bytes  "LPBFGT01"
//! width        u32
//! height       u32
//! frame_count  u32
//! gt config    track_width u32, cutoff f32,
//!              cross-section x_min/y_min/x_max/y_max u32,
//!              scan_direction u8, inner_buffer u32, outer_buffer u32
//! per frame:
//!   laser_on   u8
//!   has_center u8, center_x f64, center_y f64
//!   run_count  u32, then run_count * (count u32, label u8)
//!              with label 0 = background, 1 = foreground, 2 = excluded;
//!              counts sum to width * height (row-major RLE)
//! ```

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::gt::{GroundTruth, GtConfig, GtLabel, Rect, ScanDirection};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

pub const SEQ_MAGIC: &[u8; 8] = b"LPBFSEQ1";
pub const GT_MAGIC: &[u8; 8] = b"LPBFGT01";

/// Stored sample format of a sequence file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqDtype {
    /// Raw camera counts, rounded to the nearest integer.
    U16,
    /// Calibrated intensities at full precision.
    F32,
}

impl SeqDtype {
    fn tag(&self) -> u8 {
        match self {
            SeqDtype::U16 => 1,
            SeqDtype::F32 => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(SeqDtype::U16),
            2 => Ok(SeqDtype::F32),
            other => Err(Error::Corrupt(format!("unknown dtype tag {other}"))),
        }
    }

    pub fn bytes_per_pixel(&self) -> usize {
        match self {
            SeqDtype::U16 => 2,
            SeqDtype::F32 => 4,
        }
    }
}

/// Exact on-disk size of a sequence file with the given geometry.
pub fn sequence_file_size(width: usize, height: usize, frames: usize, dtype: SeqDtype) -> u64 {
    (SEQ_MAGIC.len() + 4 + 4 + 4 + 1 + 4) as u64
        + (frames * width * height * dtype.bytes_per_pixel()) as u64
}

/// Streaming sequence writer; the frame count is back-patched on `finish`.
pub struct SequenceWriter<W: Write + Seek> {
    out: W,
    width: usize,
    height: usize,
    dtype: SeqDtype,
    frames: u32,
}

impl<W: Write + Seek> SequenceWriter<W> {
    pub fn new(mut out: W, width: usize, height: usize, dtype: SeqDtype, warmup: u32) -> Result<Self> {
        out.write_all(SEQ_MAGIC)?;
        out.write_all(&(width as u32).to_le_bytes())?;
        out.write_all(&(height as u32).to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        out.write_all(&[dtype.tag()])?;
        out.write_all(&warmup.to_le_bytes())?;
        Ok(SequenceWriter {
            out,
            width,
            height,
            dtype,
            frames: 0,
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::shape((self.width, self.height), frame.dims()));
        }
        match self.dtype {
            SeqDtype::U16 => {
                let mut buf = Vec::with_capacity(frame.len() * 2);
                for v in frame.pixels() {
                    buf.extend_from_slice(&(v.round().clamp(0.0, 65535.0) as u16).to_le_bytes());
                }
                self.out.write_all(&buf)?;
            }
            SeqDtype::F32 => {
                let mut buf = Vec::with_capacity(frame.len() * 4);
                for v in frame.pixels() {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
                self.out.write_all(&buf)?;
            }
        }
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.seek(SeekFrom::Start(SEQ_MAGIC.len() as u64 + 8))?;
        self.out.write_all(&self.frames.to_le_bytes())?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Streaming sequence reader.
pub struct SequenceReader<R: Read> {
    input: R,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub dtype: SeqDtype,
    pub warmup_count: usize,
    read: usize,
}

impl SequenceReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        SequenceReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> SequenceReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != SEQ_MAGIC {
            return Err(Error::Corrupt("bad sequence magic".into()));
        }
        let width = read_u32(&mut input)? as usize;
        let height = read_u32(&mut input)? as usize;
        let frame_count = read_u32(&mut input)? as usize;
        let mut tag = [0u8; 1];
        input.read_exact(&mut tag)?;
        let dtype = SeqDtype::from_tag(tag[0])?;
        let warmup_count = read_u32(&mut input)? as usize;
        Ok(SequenceReader {
            input,
            width,
            height,
            frame_count,
            dtype,
            warmup_count,
            read: 0,
        })
    }

    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        if self.read >= self.frame_count {
            return Ok(None);
        }
        let n = self.width * self.height;
        let mut pixels = Vec::with_capacity(n);
        match self.dtype {
            SeqDtype::U16 => {
                let mut buf = vec![0u8; n * 2];
                self.input.read_exact(&mut buf)?;
                for chunk in buf.chunks_exact(2) {
                    pixels.push(u16::from_le_bytes([chunk[0], chunk[1]]) as f32);
                }
            }
            SeqDtype::F32 => {
                let mut buf = vec![0u8; n * 4];
                self.input.read_exact(&mut buf)?;
                for chunk in buf.chunks_exact(4) {
                    pixels.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
                }
            }
        }
        let index = self.read;
        self.read += 1;
        Ok(Some(Frame::new(self.width, self.height, pixels)?.with_index(index)))
    }
}

/// Writes a whole in-memory sequence.
pub fn write_sequence(path: &Path, seq: &FrameSequence, dtype: SeqDtype) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let (w, h) = seq.dims().unwrap_or((0, 0));
    let mut writer = SequenceWriter::new(file, w, h, dtype, seq.warmup_count() as u32)?;
    for frame in seq.frames() {
        writer.write_frame(frame)?;
    }
    writer.finish()?;
    Ok(())
}

/// Reads a whole sequence into memory. The frame rate is not stored in the
/// container; loaded sequences default to 60 Hz.
pub fn read_sequence(path: &Path) -> Result<FrameSequence> {
    let mut reader = SequenceReader::open(path)?;
    let mut frames = Vec::with_capacity(reader.frame_count);
    while let Some(frame) = reader.next_frame()? {
        frames.push(frame);
    }
    let warmup = reader.warmup_count.min(frames.len());
    FrameSequence::new(frames, 60.0, warmup)
}

/// Streaming ground-truth sidecar writer.
pub struct GtWriter<W: Write + Seek> {
    out: W,
    width: usize,
    height: usize,
    frames: u32,
}

impl<W: Write + Seek> GtWriter<W> {
    pub fn new(mut out: W, width: usize, height: usize, cfg: &GtConfig) -> Result<Self> {
        out.write_all(GT_MAGIC)?;
        out.write_all(&(width as u32).to_le_bytes())?;
        out.write_all(&(height as u32).to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        out.write_all(&(cfg.track_width as u32).to_le_bytes())?;
        out.write_all(&cfg.cutoff.to_le_bytes())?;
        for v in [
            cfg.cross_section.x_min,
            cfg.cross_section.y_min,
            cfg.cross_section.x_max,
            cfg.cross_section.y_max,
        ] {
            out.write_all(&(v as u32).to_le_bytes())?;
        }
        out.write_all(&[cfg.scan_direction.tag()])?;
        out.write_all(&(cfg.inner_buffer as u32).to_le_bytes())?;
        out.write_all(&(cfg.outer_buffer as u32).to_le_bytes())?;
        Ok(GtWriter {
            out,
            width,
            height,
            frames: 0,
        })
    }

    pub fn write_frame(&mut self, gt: &GroundTruth) -> Result<()> {
        if gt.dims() != (self.width, self.height) {
            return Err(Error::shape((self.width, self.height), gt.dims()));
        }
        self.out.write_all(&[gt.laser_on() as u8])?;
        match gt.laser_center() {
            Some((x, y)) => {
                self.out.write_all(&[1u8])?;
                self.out.write_all(&x.to_le_bytes())?;
                self.out.write_all(&y.to_le_bytes())?;
            }
            None => {
                self.out.write_all(&[0u8])?;
                self.out.write_all(&0f64.to_le_bytes())?;
                self.out.write_all(&0f64.to_le_bytes())?;
            }
        }
        // Row-major RLE over the label array.
        let mut runs: Vec<(u32, u8)> = Vec::new();
        for label in gt.labels() {
            let tag = match label {
                GtLabel::Background => 0u8,
                GtLabel::Foreground => 1,
                GtLabel::Excluded => 2,
            };
            match runs.last_mut() {
                Some((count, last)) if *last == tag => *count += 1,
                _ => runs.push((1, tag)),
            }
        }
        self.out.write_all(&(runs.len() as u32).to_le_bytes())?;
        for (count, tag) in runs {
            self.out.write_all(&count.to_le_bytes())?;
            self.out.write_all(&[tag])?;
        }
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.seek(SeekFrom::Start(GT_MAGIC.len() as u64 + 8))?;
        self.out.write_all(&self.frames.to_le_bytes())?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Streaming ground-truth sidecar reader.
pub struct GtReader<R: Read> {
    input: R,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub config: GtConfig,
    read: usize,
}

impl GtReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        GtReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> GtReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != GT_MAGIC {
            return Err(Error::Corrupt("bad ground-truth sidecar magic".into()));
        }
        let width = read_u32(&mut input)? as usize;
        let height = read_u32(&mut input)? as usize;
        let frame_count = read_u32(&mut input)? as usize;
        let track_width = read_u32(&mut input)? as usize;
        let cutoff = read_f32(&mut input)?;
        let x_min = read_u32(&mut input)? as usize;
        let y_min = read_u32(&mut input)? as usize;
        let x_max = read_u32(&mut input)? as usize;
        let y_max = read_u32(&mut input)? as usize;
        let mut tag = [0u8; 1];
        input.read_exact(&mut tag)?;
        let scan_direction = ScanDirection::from_tag(tag[0])?;
        let inner_buffer = read_u32(&mut input)? as usize;
        let outer_buffer = read_u32(&mut input)? as usize;
        let config = GtConfig {
            track_width,
            cutoff,
            cross_section: Rect::new(x_min, y_min, x_max, y_max)?,
            scan_direction,
            inner_buffer,
            outer_buffer,
        };
        Ok(GtReader {
            input,
            width,
            height,
            frame_count,
            config,
            read: 0,
        })
    }

    pub fn next_frame(&mut self) -> Result<Option<GroundTruth>> {
        if self.read >= self.frame_count {
            return Ok(None);
        }
        let mut flags = [0u8; 2];
        self.input.read_exact(&mut flags)?;
        let _laser_on = flags[0] != 0;
        let has_center = flags[1] != 0;
        let x = read_f64(&mut self.input)?;
        let y = read_f64(&mut self.input)?;
        let center = has_center.then_some((x, y));

        let n_runs = read_u32(&mut self.input)?;
        let total = self.width * self.height;
        let mut labels = Vec::with_capacity(total);
        for _ in 0..n_runs {
            let count = read_u32(&mut self.input)? as usize;
            let mut tag = [0u8; 1];
            self.input.read_exact(&mut tag)?;
            let label = match tag[0] {
                0 => GtLabel::Background,
                1 => GtLabel::Foreground,
                2 => GtLabel::Excluded,
                other => return Err(Error::Corrupt(format!("bad label tag {other}"))),
            };
            if labels.len() + count > total {
                return Err(Error::Corrupt("label runs exceed frame size".into()));
            }
            labels.extend(std::iter::repeat_n(label, count));
        }
        if labels.len() != total {
            return Err(Error::Corrupt(format!(
                "label runs cover {} of {} pixels",
                labels.len(),
                total
            )));
        }
        self.read += 1;
        Ok(Some(GroundTruth::from_parts(
            self.width,
            self.height,
            labels,
            center,
        )))
    }
}

pub fn read_gt_sidecar(path: &Path) -> Result<(GtConfig, Vec<GroundTruth>)> {
    let mut reader = GtReader::open(path)?;
    let mut gts = Vec::with_capacity(reader.frame_count);
    while let Some(gt) = reader.next_frame()? {
        gts.push(gt);
    }
    Ok((reader.config, gts))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f32<R: Read>(input: &mut R) -> Result<f32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(f32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
