//! JPEG marker-segment handling.
//!
//! A JPEG stream is a sequence of `0xFF`-prefixed markers. Most markers
//! introduce a segment with a 2-byte big-endian length (which includes
//! itself); `SOS` is followed by entropy-coded data that runs until the
//! next real marker (`FF 00` is byte stuffing and `RSTn` markers belong
//! to the scan). Provenance travels in one or more `APP1` segments whose
//! payload starts with the 16-byte signature `PROV-JSONLD/1.0\0`,
//! followed by a 2-byte segment index, a 2-byte total count, and up to
//! 65,513 payload bytes. Segments are written contiguously after the
//! leading `APP0`/`APP1` run and reassembled by index, so on-disk order
//! does not matter on the way back in.

use crate::Warning;

use super::{ContainerError, EmbedResult};

const MARKER: u8 = 0xFF;
const SOI: u8 = 0xD8;
const EOI: u8 = 0xD9;
const SOS: u8 = 0xDA;
const TEM: u8 = 0x01;
const APP0: u8 = 0xE0;
const APP1: u8 = 0xE1;

/// ASCII signature at the start of every provenance APP1 payload.
pub const SIGNATURE: &[u8; 16] = b"PROV-JSONLD/1.0\0";

/// Payload capacity per segment: 65,533 bytes of segment data minus the
/// 20-byte provenance header (16 signature + 2 index + 2 count).
pub const SEGMENT_CAPACITY: usize = 65_533 - SIGNATURE.len() - 4;

fn corrupt(message: impl Into<String>) -> ContainerError {
    ContainerError::CorruptContainer(message.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PieceKind {
    Soi,
    Eoi,
    /// A standalone marker with no length field (TEM, RSTn outside a scan).
    Bare(u8),
    /// A marker segment with a length field; the u8 is the marker id.
    Segment(u8),
    /// Entropy-coded scan data following an SOS header.
    Ecs,
}

#[derive(Debug, Clone, Copy)]
struct Piece<'a> {
    kind: PieceKind,
    raw: &'a [u8],
}

impl Piece<'_> {
    fn segment_payload(&self) -> &[u8] {
        // marker (2) + length (2), validated during parsing
        &self.raw[4..]
    }

    fn is_provenance(&self) -> bool {
        self.kind == PieceKind::Segment(APP1) && self.segment_payload().starts_with(SIGNATURE)
    }
}

fn parse_pieces(bytes: &[u8]) -> Result<Vec<Piece<'_>>, ContainerError> {
    if bytes.len() < 2 || bytes[0] != MARKER || bytes[1] != SOI {
        return Err(corrupt("missing SOI marker"));
    }
    let mut pieces = vec![Piece {
        kind: PieceKind::Soi,
        raw: &bytes[0..2],
    }];
    let mut pos = 2;
    loop {
        let start = pos;
        if pos >= bytes.len() {
            return Err(corrupt("missing EOI marker"));
        }
        if bytes[pos] != MARKER {
            return Err(corrupt(format!(
                "expected marker at byte {pos}, found {:#04x}",
                bytes[pos]
            )));
        }
        // 0xFF may repeat as fill before the marker id.
        while pos < bytes.len() && bytes[pos] == MARKER {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(corrupt("truncated marker"));
        }
        let id = bytes[pos];
        pos += 1;
        match id {
            0x00 => return Err(corrupt("stuffed byte outside entropy-coded data")),
            SOI => return Err(corrupt("unexpected SOI inside stream")),
            EOI => {
                pieces.push(Piece {
                    kind: PieceKind::Eoi,
                    raw: &bytes[start..pos],
                });
                if pos != bytes.len() {
                    return Err(corrupt("data after EOI marker"));
                }
                return Ok(pieces);
            }
            TEM | 0xD0..=0xD7 => {
                pieces.push(Piece {
                    kind: PieceKind::Bare(id),
                    raw: &bytes[start..pos],
                });
            }
            _ => {
                if bytes.len() - pos < 2 {
                    return Err(corrupt("truncated segment length"));
                }
                let length = u16::from_be_bytes([bytes[pos], bytes[pos + 1]]) as usize;
                if length < 2 {
                    return Err(corrupt(format!("segment length {length} below minimum")));
                }
                if pos + length > bytes.len() {
                    return Err(corrupt("segment runs past end of file"));
                }
                let end = pos + length;
                pieces.push(Piece {
                    kind: PieceKind::Segment(id),
                    raw: &bytes[start..end],
                });
                pos = end;
                if id == SOS {
                    let ecs_start = pos;
                    pos = scan_entropy_coded(bytes, pos)?;
                    pieces.push(Piece {
                        kind: PieceKind::Ecs,
                        raw: &bytes[ecs_start..pos],
                    });
                }
            }
        }
    }
}

/// Advances past entropy-coded data: stops at the first `0xFF` followed
/// by anything other than `0x00` (stuffing) or an `RSTn` marker.
fn scan_entropy_coded(bytes: &[u8], mut pos: usize) -> Result<usize, ContainerError> {
    while pos < bytes.len() {
        if bytes[pos] != MARKER {
            pos += 1;
            continue;
        }
        match bytes.get(pos + 1) {
            None => return Err(corrupt("entropy-coded data ends without a marker")),
            Some(0x00) => pos += 2,
            Some(0xD0..=0xD7) => pos += 2,
            Some(&MARKER) => pos += 1, // fill byte
            Some(_) => return Ok(pos),
        }
    }
    Err(corrupt("missing EOI marker"))
}

fn build_provenance_segments(payload: &[u8]) -> Vec<Vec<u8>> {
    let total = payload.len().div_ceil(SEGMENT_CAPACITY).max(1);
    let mut segments = Vec::with_capacity(total);
    for index in 0..total {
        let chunk = &payload[index * SEGMENT_CAPACITY..(index * SEGMENT_CAPACITY
            + SEGMENT_CAPACITY)
            .min(payload.len())];
        let mut segment = Vec::with_capacity(chunk.len() + 24);
        segment.push(MARKER);
        segment.push(APP1);
        let length = (2 + SIGNATURE.len() + 4 + chunk.len()) as u16;
        segment.extend_from_slice(&length.to_be_bytes());
        segment.extend_from_slice(SIGNATURE);
        segment.extend_from_slice(&(index as u16).to_be_bytes());
        segment.extend_from_slice(&(total as u16).to_be_bytes());
        segment.extend_from_slice(chunk);
        segments.push(segment);
    }
    segments
}

pub(crate) fn embed(image: &[u8], payload: &[u8]) -> Result<EmbedResult, ContainerError> {
    if payload.len() > SEGMENT_CAPACITY * u16::MAX as usize {
        return Err(corrupt(format!(
            "payload of {} bytes exceeds the multi-segment limit",
            payload.len()
        )));
    }
    let pieces = parse_pieces(image)?;
    let kept: Vec<&Piece> = pieces.iter().filter(|p| !p.is_provenance()).collect();
    let replaced = pieces.len() - kept.len();

    // Insert after the run of leading APP0/APP1 segments, right after SOI
    // when there is none.
    let mut insert_at = 1;
    while insert_at < kept.len()
        && matches!(kept[insert_at].kind, PieceKind::Segment(APP0) | PieceKind::Segment(APP1))
    {
        insert_at += 1;
    }

    let segments = build_provenance_segments(payload);
    let mut out = Vec::with_capacity(image.len() + payload.len() + 32);
    for (i, piece) in kept.iter().enumerate() {
        if i == insert_at {
            for segment in &segments {
                out.extend_from_slice(segment);
            }
        }
        out.extend_from_slice(piece.raw);
    }
    Ok(EmbedResult {
        bytes: out,
        replaced_existing: replaced > 0,
        segment_count: segments.len(),
    })
}

pub(crate) fn extract(image: &[u8]) -> Result<(Option<Vec<u8>>, Vec<Warning>), ContainerError> {
    let pieces = parse_pieces(image)?;
    let mut found: Vec<(u16, u16, &[u8])> = Vec::new();
    for piece in pieces.iter().filter(|p| p.is_provenance()) {
        let payload = piece.segment_payload();
        if payload.len() < SIGNATURE.len() + 4 {
            return Err(corrupt("provenance segment too short for its header"));
        }
        let index = u16::from_be_bytes([payload[16], payload[17]]);
        let total = u16::from_be_bytes([payload[18], payload[19]]);
        found.push((index, total, &payload[20..]));
    }
    if found.is_empty() {
        return Ok((None, Vec::new()));
    }

    let total = found[0].1;
    if total == 0 {
        return Err(corrupt("provenance segment declares a total of 0"));
    }
    if found.iter().any(|(_, t, _)| *t != total) {
        return Err(ContainerError::IncompleteSegments(vec![]));
    }
    let mut slots: Vec<Option<&[u8]>> = vec![None; total as usize];
    for (index, _, chunk) in &found {
        let slot = slots
            .get_mut(*index as usize)
            .ok_or_else(|| corrupt(format!("segment index {index} out of range 0..{total}")))?;
        if slot.is_some() {
            return Err(corrupt(format!("duplicate provenance segment index {index}")));
        }
        *slot = Some(chunk);
    }
    let missing: Vec<u16> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| i as u16)
        .collect();
    if !missing.is_empty() {
        return Err(ContainerError::IncompleteSegments(missing));
    }
    let mut payload = Vec::new();
    for slot in slots {
        payload.extend_from_slice(slot.unwrap());
    }
    Ok((Some(payload), Vec::new()))
}

pub(crate) fn strip(image: &[u8]) -> Result<Vec<u8>, ContainerError> {
    let pieces = parse_pieces(image)?;
    let mut out = Vec::with_capacity(image.len());
    for piece in pieces.iter().filter(|p| !p.is_provenance()) {
        out.extend_from_slice(piece.raw);
    }
    Ok(out)
}
