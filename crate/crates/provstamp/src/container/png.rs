//! PNG chunk handling.
//!
//! A PNG file is the 8-byte signature followed by chunks; each chunk is a
//! 4-byte big-endian data length, 4 ASCII type bytes, the data, and a
//! CRC-32 (ISO-HDLC polynomial) over type and data. The provenance
//! payload lives in an `iTXt` chunk with the keyword `ProvenanceJSONLD`,
//! inserted immediately before the first `IDAT` so streaming readers see
//! metadata before pixel data. All other chunks are copied byte-for-byte
//! from their original spans; pixel data is never re-encoded.

use std::io::{Read, Write};

use crate::Warning;

use super::{ContainerError, EmbedResult};

pub const SIGNATURE: [u8; 8] = [0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A];

/// iTXt keyword marking the provenance chunk (16 Latin-1 bytes, within
/// the 1..=79 byte keyword limit).
pub const KEYWORD: &[u8] = b"ProvenanceJSONLD";

const ITXT: [u8; 4] = *b"iTXt";
const IHDR: [u8; 4] = *b"IHDR";
const IDAT: [u8; 4] = *b"IDAT";
const IEND: [u8; 4] = *b"IEND";

#[derive(Debug, Clone, Copy)]
pub(crate) struct Chunk<'a> {
    pub chunk_type: [u8; 4],
    pub data: &'a [u8],
    /// The full original span (length, type, data, CRC) for exact copying.
    pub raw: &'a [u8],
}

impl Chunk<'_> {
    fn is_provenance(&self) -> bool {
        self.chunk_type == ITXT
            && self.data.len() > KEYWORD.len()
            && self.data.starts_with(KEYWORD)
            && self.data[KEYWORD.len()] == 0
    }
}

fn corrupt(message: impl Into<String>) -> ContainerError {
    ContainerError::CorruptContainer(message.into())
}

/// Parses and verifies the chunk sequence: signature, IHDR first, IEND
/// last, nothing trailing, every CRC valid.
pub(crate) fn parse_chunks(bytes: &[u8]) -> Result<Vec<Chunk<'_>>, ContainerError> {
    if !bytes.starts_with(&SIGNATURE) {
        return Err(corrupt("missing PNG signature"));
    }
    let mut chunks = Vec::new();
    let mut pos = SIGNATURE.len();
    while pos < bytes.len() {
        if bytes.len() - pos < 12 {
            return Err(corrupt("truncated chunk header"));
        }
        let length = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        let chunk_type: [u8; 4] = bytes[pos + 4..pos + 8].try_into().unwrap();
        if !chunk_type.iter().all(u8::is_ascii_alphabetic) {
            return Err(corrupt(format!("invalid chunk type {chunk_type:?}")));
        }
        let data_start = pos + 8;
        let Some(crc_start) = data_start.checked_add(length) else {
            return Err(corrupt("chunk length overflow"));
        };
        if crc_start + 4 > bytes.len() {
            return Err(corrupt("chunk data runs past end of file"));
        }
        let data = &bytes[data_start..crc_start];
        let stored_crc = u32::from_be_bytes(bytes[crc_start..crc_start + 4].try_into().unwrap());
        let actual_crc = crc32(&[&chunk_type, data]);
        if stored_crc != actual_crc {
            return Err(corrupt(format!(
                "CRC mismatch in {} chunk: stored {stored_crc:#010x}, computed {actual_crc:#010x}",
                String::from_utf8_lossy(&chunk_type)
            )));
        }
        let raw = &bytes[pos..crc_start + 4];
        chunks.push(Chunk {
            chunk_type,
            data,
            raw,
        });
        pos = crc_start + 4;
        if chunk_type == IEND {
            if pos != bytes.len() {
                return Err(corrupt("data after IEND chunk"));
            }
            break;
        }
    }
    match chunks.first() {
        Some(first) if first.chunk_type == IHDR => {}
        _ => return Err(corrupt("first chunk is not IHDR")),
    }
    if chunks.last().map(|c| c.chunk_type) != Some(IEND) {
        return Err(corrupt("missing IEND chunk"));
    }
    Ok(chunks)
}

fn write_chunk(out: &mut Vec<u8>, chunk_type: [u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(&chunk_type);
    out.extend_from_slice(data);
    out.extend_from_slice(&crc32(&[&chunk_type, data]).to_be_bytes());
}

/// iTXt layout: keyword, NUL, compression flag, compression method,
/// language tag, NUL, translated keyword, NUL, text.
fn build_itxt_data(payload: &[u8], compress: bool) -> Result<Vec<u8>, ContainerError> {
    let mut data = Vec::with_capacity(KEYWORD.len() + 5 + payload.len());
    data.extend_from_slice(KEYWORD);
    data.push(0);
    if compress {
        data.push(1); // compression flag
        data.push(0); // method 0: DEFLATE in a zlib wrapper
    } else {
        data.push(0);
        data.push(0);
    }
    data.push(0); // empty language tag
    data.push(0); // empty translated keyword
    if compress {
        let mut encoder =
            flate2::write::ZlibEncoder::new(Vec::new(), flate2::Compression::default());
        encoder
            .write_all(payload)
            .and_then(|_| encoder.finish())
            .map(|deflated| data.extend_from_slice(&deflated))
            .map_err(|e| ContainerError::BadCompression(e.to_string()))?;
    } else {
        data.extend_from_slice(payload);
    }
    Ok(data)
}

fn read_itxt_payload(data: &[u8]) -> Result<Vec<u8>, ContainerError> {
    let mut pos = KEYWORD.len() + 1; // keyword and its NUL were matched
    if data.len() < pos + 2 {
        return Err(corrupt("truncated iTXt header"));
    }
    let flag = data[pos];
    let method = data[pos + 1];
    pos += 2;
    for field in ["language tag", "translated keyword"] {
        match data[pos..].iter().position(|&b| b == 0) {
            Some(nul) => pos += nul + 1,
            None => return Err(corrupt(format!("unterminated iTXt {field}"))),
        }
    }
    let text = &data[pos..];
    match flag {
        0 => Ok(text.to_vec()),
        1 => {
            if method != 0 {
                return Err(ContainerError::BadCompression(format!(
                    "unknown compression method {method}"
                )));
            }
            let mut decoder = flate2::read::ZlibDecoder::new(text);
            let mut payload = Vec::new();
            decoder
                .read_to_end(&mut payload)
                .map_err(|e| ContainerError::BadCompression(e.to_string()))?;
            Ok(payload)
        }
        other => Err(ContainerError::BadCompression(format!(
            "unknown compression flag {other}"
        ))),
    }
}

pub(crate) fn embed(
    image: &[u8],
    payload: &[u8],
    compress: bool,
) -> Result<EmbedResult, ContainerError> {
    let chunks = parse_chunks(image)?;
    if !chunks.iter().any(|c| c.chunk_type == IDAT) {
        return Err(corrupt("missing IDAT chunk"));
    }
    let itxt = build_itxt_data(payload, compress)?;
    let mut out = Vec::with_capacity(image.len() + itxt.len() + 12);
    out.extend_from_slice(&SIGNATURE);
    let mut replaced = 0usize;
    let mut inserted = false;
    for chunk in &chunks {
        if chunk.is_provenance() {
            replaced += 1;
            continue;
        }
        if !inserted && chunk.chunk_type == IDAT {
            write_chunk(&mut out, ITXT, &itxt);
            inserted = true;
        }
        out.extend_from_slice(chunk.raw);
    }
    Ok(EmbedResult {
        bytes: out,
        replaced_existing: replaced > 0,
        segment_count: 1,
    })
}

pub(crate) fn extract(image: &[u8]) -> Result<(Option<Vec<u8>>, Vec<Warning>), ContainerError> {
    let chunks = parse_chunks(image)?;
    let provenance: Vec<&Chunk> = chunks.iter().filter(|c| c.is_provenance()).collect();
    let mut warnings = Vec::new();
    match provenance.first() {
        None => Ok((None, warnings)),
        Some(first) => {
            if provenance.len() > 1 {
                warnings.push(Warning::new(
                    "multiple-provenance-chunks",
                    format!(
                        "file carries {} provenance chunks; returning the first",
                        provenance.len()
                    ),
                ));
            }
            Ok((Some(read_itxt_payload(first.data)?), warnings))
        }
    }
}

pub(crate) fn strip(image: &[u8]) -> Result<Vec<u8>, ContainerError> {
    let chunks = parse_chunks(image)?;
    let mut out = Vec::with_capacity(image.len());
    out.extend_from_slice(&SIGNATURE);
    for chunk in &chunks {
        if !chunk.is_provenance() {
            out.extend_from_slice(chunk.raw);
        }
    }
    Ok(out)
}

// CRC-32 with the ISO-HDLC polynomial, as mandated by the PNG
// specification, via the usual 256-entry table.
const CRC_TABLE: [u32; 256] = {
    let mut table = [0u32; 256];
    let mut n = 0;
    while n < 256 {
        let mut c = n as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB88320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[n] = c;
        n += 1;
    }
    table
};

pub(crate) fn crc32(parts: &[&[u8]]) -> u32 {
    let mut c = u32::MAX;
    for part in parts {
        for &b in *part {
            c = CRC_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
        }
    }
    c ^ u32::MAX
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal container-valid PNG: IHDR + one IDAT + IEND.
    pub(crate) fn minimal_png(idat: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&SIGNATURE);
        let ihdr = [0, 0, 0, 1, 0, 0, 0, 1, 8, 0, 0, 0, 0]; // 1x1, grayscale
        write_chunk(&mut out, IHDR, &ihdr);
        write_chunk(&mut out, IDAT, idat);
        write_chunk(&mut out, IEND, &[]);
        out
    }

    #[test]
    fn embed_inserts_before_idat_and_round_trips() {
        let image = minimal_png(&[1, 2, 3]);
        let result = embed(&image, br#"{"a":1}"#, false).unwrap();
        assert!(!result.replaced_existing);
        assert_eq!(result.segment_count, 1);
        let chunks = parse_chunks(&result.bytes).unwrap();
        assert_eq!(chunks.len(), 4);
        let types: Vec<[u8; 4]> = chunks.iter().map(|c| c.chunk_type).collect();
        assert_eq!(types, vec![IHDR, ITXT, IDAT, IEND]);
        // Third from last, immediately before IDAT.
        assert_eq!(chunks[chunks.len() - 3].chunk_type, ITXT);
        let (payload, warnings) = extract(&result.bytes).unwrap();
        assert_eq!(payload.as_deref(), Some(br#"{"a":1}"#.as_slice()));
        assert!(warnings.is_empty());
    }

    #[test]
    fn compressed_payloads_round_trip() {
        let image = minimal_png(&[9; 64]);
        let payload = br#"{"key":"value","list":[1,2,3,4,5,6,7,8,9]}"#.repeat(50);
        let plain = embed(&image, &payload, false).unwrap();
        let squeezed = embed(&image, &payload, true).unwrap();
        assert!(squeezed.bytes.len() < plain.bytes.len());
        let (extracted, _) = extract(&squeezed.bytes).unwrap();
        assert_eq!(extracted.unwrap(), payload);
    }

    #[test]
    fn corrupted_crc_is_detected() {
        let image = minimal_png(&[7, 7, 7]);
        let mut broken = image.clone();
        let len = broken.len();
        // Last 4 bytes of the IDAT chunk (before the 12-byte IEND) are its CRC.
        broken[len - 13] ^= 0xFF;
        assert!(matches!(
            parse_chunks(&broken),
            Err(ContainerError::CorruptContainer(_))
        ));
    }

    #[test]
    fn re_embedding_replaces_previous_payload() {
        let image = minimal_png(&[0; 16]);
        let first = embed(&image, b"{\"v\":1}", false).unwrap();
        let second = embed(&first.bytes, b"{\"v\":2}", false).unwrap();
        assert!(second.replaced_existing);
        let direct = embed(&image, b"{\"v\":2}", false).unwrap();
        assert_eq!(second.bytes, direct.bytes);
        let (payload, _) = extract(&second.bytes).unwrap();
        assert_eq!(payload.unwrap(), b"{\"v\":2}");
    }

    #[test]
    fn strip_restores_the_original_bytes() {
        let image = minimal_png(&[4, 5, 6, 7]);
        let embedded = embed(&image, b"{}", false).unwrap();
        assert_eq!(strip(&embedded.bytes).unwrap(), image);
        assert_eq!(strip(&image).unwrap(), image);
    }

    #[test]
    fn foreign_itxt_chunks_are_untouched() {
        let mut image = Vec::new();
        image.extend_from_slice(&SIGNATURE);
        let ihdr = [0, 0, 0, 1, 0, 0, 0, 1, 8, 0, 0, 0, 0];
        write_chunk(&mut image, IHDR, &ihdr);
        let mut other = b"Comment".to_vec();
        other.extend_from_slice(&[0, 0, 0, 0, 0]);
        other.extend_from_slice(b"hello");
        write_chunk(&mut image, ITXT, &other);
        write_chunk(&mut image, IDAT, &[1]);
        write_chunk(&mut image, IEND, &[]);

        let embedded = embed(&image, b"{}", false).unwrap();
        assert!(!embedded.replaced_existing);
        assert_eq!(strip(&embedded.bytes).unwrap(), image);
        let (payload, _) = extract(&image).unwrap();
        assert_eq!(payload, None);
    }

    #[test]
    fn multiple_provenance_chunks_warn_and_return_first() {
        let image = minimal_png(&[1]);
        let embedded = embed(&image, b"{\"n\":1}", false).unwrap();
        // Duplicate the provenance chunk by hand.
        let chunks = parse_chunks(&embedded.bytes).unwrap();
        let mut doubled = Vec::new();
        doubled.extend_from_slice(&SIGNATURE);
        for chunk in &chunks {
            doubled.extend_from_slice(chunk.raw);
            if chunk.is_provenance() {
                let mut data = chunk.data.to_vec();
                let text_at = data.len() - b"{\"n\":1}".len();
                data.truncate(text_at);
                data.extend_from_slice(b"{\"n\":2}");
                write_chunk(&mut doubled, ITXT, &data);
            }
        }
        let (payload, warnings) = extract(&doubled).unwrap();
        assert_eq!(payload.unwrap(), b"{\"n\":1}");
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, "multiple-provenance-chunks");
    }
}
