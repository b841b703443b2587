//! Shared helpers for integration tests: deterministic generators for
//! records, queries and image containers, plus independent reference
//! implementations (bitwise CRC-32, from-the-standard SHA-256, a naive
//! query evaluator) used as oracles against the crate.

#![allow(dead_code)]

pub mod reference;

use std::collections::BTreeMap;

use rand::prelude::IndexedRandom;
use rand::Rng;

use provstamp::model::{
    Agent, AgentType, Annotation, CriterionEntry, DatasetDescriptor, EventType, Fidelity,
    GenerationParams, ProvenanceRecord, RecordOrigin, Requirement, RevisionAction,
    RevisionRequest, Scalar, ScalarMap, Split, Timestamp, TransformationEvent,
};
use provstamp::query::{CompareOp, Literal, Path, PathSegment, QueryExpr};
use provstamp::Mode;

/// The golden two-dogs record: a synthetic flux image carrying two Dog
/// requirements and two Dog annotations.
pub fn golden_record() -> ProvenanceRecord {
    ProvenanceRecord::from_origin(RecordOrigin {
        name: Some("image_of_person".into()),
        creator: Some(Agent::person("Author 1")),
        method_of_collection: Some("flux".into()),
        date_created: Some(Timestamp::parse("2025-03-02T09:31:00Z").unwrap()),
        encoding_format: Some("image/png".into()),
        fidelity: Some(Fidelity::Synthetic),
        generation: Some(GenerationParams {
            generator_name: String::new(),
            generator_version: "flux1.schnell".into(),
            prompt: "A photo taken with a Nikon Z9 of two dogs playing in a vibrant dog park \
                     on a sunny afternoon."
                .into(),
            seed: "140716430322376".into(),
            steps: 4,
            sampler: "euler_ancestral".into(),
            width: 1024,
            height: 1024,
            extra: ScalarMap::new(),
        }),
        requirements: vec![
            Requirement::new(
                "The object detector shall detect a \"Dog\" class when the class is in a park \
                 setting",
            ),
            Requirement::new(
                "The object detector shall detect a \"Dog\" class when there are 2 instances \
                 of the class in the image",
            ),
        ],
        annotations: vec![
            Annotation {
                class_name: "Dog".into(),
                bbox: [112.0, 262.0, 420.0, 612.0],
                annotator: None,
                date_annotated: None,
                annotation_type: None,
            },
            Annotation {
                class_name: "Dog".into(),
                bbox: [524.0, 288.0, 830.0, 604.0],
                annotator: None,
                date_annotated: None,
                annotation_type: None,
            },
        ],
        ..RecordOrigin::default()
    })
    .unwrap()
}

// ---------------------------------------------------------------------------
// Record generation
// ---------------------------------------------------------------------------

const NAMES: &[&str] = &[
    "image_of_person",
    "street_scene",
    "park_dogs",
    "warehouse_shelf",
    "traffic_cam",
];
const CLASSES: &[&str] = &["Dog", "Cat", "Person", "Car", "Bicycle"];
const SAMPLERS: &[&str] = &["euler_ancestral", "ddim", "dpm_solver"];
const METHODS: &[&str] = &["flux", "camera", "web-scrape"];
const REQUIREMENT_POOL: &[&str] = &[
    "The object detector shall detect a \"Dog\" class when the class is in a park setting",
    "The object detector shall detect a \"Dog\" class when there are 2 instances of the class in the image",
    "The classifier shall tolerate motion blur",
    "The detector shall work at night",
];

pub fn random_timestamp(rng: &mut impl Rng) -> Timestamp {
    // 2020-01-01 .. 2026-01-01, whole seconds.
    let secs = rng.random_range(1_577_836_800..1_767_225_600i64);
    Timestamp::from_datetime(chrono::DateTime::from_timestamp(secs, 0).unwrap())
}

pub fn random_agent(rng: &mut impl Rng) -> Agent {
    let agent_type = *[AgentType::Person, AgentType::Organization, AgentType::Software]
        .choose(rng)
        .unwrap();
    let name = format!("agent-{}", rng.random_range(0..50u32));
    let identifier = if rng.random_bool(0.3) {
        Some(format!("https://example.org/agents/{}", rng.random_range(0..50u32)))
    } else {
        None
    };
    Agent {
        agent_type,
        name,
        identifier,
    }
}

fn random_scalar(rng: &mut impl Rng) -> Scalar {
    match rng.random_range(0..4) {
        0 => Scalar::Bool(rng.random_bool(0.5)),
        1 => Scalar::Int(rng.random_range(-1000..1000)),
        // Dyadic fractions survive float round-trips exactly.
        2 => Scalar::Float(rng.random_range(-512..512) as f64 / 8.0),
        _ => Scalar::String(format!("value-{}", rng.random_range(0..100u32))),
    }
}

pub fn random_generation(rng: &mut impl Rng) -> GenerationParams {
    let mut extra = ScalarMap::new();
    if rng.random_bool(0.3) {
        extra.insert("guidance".into(), random_scalar(rng));
    }
    let seed_len = rng.random_range(1..20usize);
    let seed: String = (0..seed_len)
        .map(|i| {
            let d = if i == 0 {
                rng.random_range(1..10u8)
            } else {
                rng.random_range(0..10u8)
            };
            (b'0' + d) as char
        })
        .collect();
    GenerationParams {
        generator_name: if rng.random_bool(0.3) { "flux".into() } else { String::new() },
        generator_version: format!("flux1.{}", rng.random_range(0..9u8)),
        prompt: format!("prompt number {}", rng.random_range(0..1000u32)),
        seed,
        steps: rng.random_range(1..60),
        sampler: SAMPLERS.choose(rng).unwrap().to_string(),
        width: *[256u32, 512, 1024].choose(rng).unwrap(),
        height: *[256u32, 512, 1024].choose(rng).unwrap(),
        extra,
    }
}

fn random_annotation(rng: &mut impl Rng) -> Annotation {
    let x1 = rng.random_range(0..512) as f64;
    let y1 = rng.random_range(0..512) as f64;
    let x2 = x1 + rng.random_range(1..256) as f64;
    let y2 = y1 + rng.random_range(1..256) as f64;
    Annotation {
        class_name: CLASSES.choose(rng).unwrap().to_string(),
        bbox: [x1, y1, x2, y2],
        annotator: rng.random_bool(0.4).then(|| random_agent(rng)),
        date_annotated: rng.random_bool(0.4).then(|| random_timestamp(rng)),
        annotation_type: rng.random_bool(0.4).then(|| "bounding-box".to_string()),
    }
}

/// A random valid record, optionally extended with transformation and
/// revision history through the append operations.
pub fn random_record(rng: &mut impl Rng) -> ProvenanceRecord {
    let synthetic = rng.random_bool(0.5);
    let mut capture_metadata = ScalarMap::new();
    if rng.random_bool(0.4) {
        capture_metadata.insert("resolution".into(), Scalar::String("1920x1080".into()));
        capture_metadata.insert("contrast".into(), random_scalar(rng));
    }
    let dataset = rng.random_bool(0.3).then(|| {
        // Two dyadic fractions summing exactly to 1.0.
        let p = rng.random_range(1..16) as f64 / 16.0;
        let mut class_proportions = BTreeMap::new();
        class_proportions.insert("Dog".to_string(), p);
        class_proportions.insert("Cat".to_string(), 1.0 - p);
        DatasetDescriptor {
            dataset_id: format!("ds-{}", rng.random_range(0..10u32)),
            class_proportions,
            split_proportions: BTreeMap::new(),
        }
    });
    let requirement_count = rng.random_range(0..3usize);
    let annotation_count = rng.random_range(0..4usize);
    let origin = RecordOrigin {
        name: Some(format!(
            "{}_{:04}",
            NAMES.choose(rng).unwrap(),
            rng.random_range(0..10_000u32)
        )),
        creator: Some(random_agent(rng)),
        method_of_collection: Some(METHODS.choose(rng).unwrap().to_string()),
        date_created: Some(random_timestamp(rng)),
        encoding_format: Some(
            ["image/png", "image/jpeg"].choose(rng).unwrap().to_string(),
        ),
        fidelity: Some(if synthetic { Fidelity::Synthetic } else { Fidelity::Real }),
        source: rng.random_bool(0.3).then(|| "https://example.org/source".to_string()),
        capture_metadata,
        generation: synthetic.then(|| random_generation(rng)),
        inclusion_criteria: rng
            .random_bool(0.2)
            .then(|| {
                vec![CriterionEntry {
                    text: "frames with at least one subject".into(),
                    agent: Some(random_agent(rng)),
                    date: Some(random_timestamp(rng)),
                }]
            })
            .unwrap_or_default(),
        exclusion_criteria: Vec::new(),
        requirements: REQUIREMENT_POOL
            .choose_multiple(rng, requirement_count)
            .map(|r| Requirement::new(*r))
            .collect(),
        annotations: (0..annotation_count).map(|_| random_annotation(rng)).collect(),
        split: rng.random_bool(0.6).then(|| {
            *[Split::Training, Split::Validation, Split::Testing]
                .choose(rng)
                .unwrap()
        }),
        dataset,
        ..RecordOrigin::default()
    };
    let mut record = ProvenanceRecord::from_origin(origin).unwrap();

    // Grow some history through the public append operations, keeping
    // event timestamps non-decreasing.
    let mut clock = record.date_created;
    for _ in 0..rng.random_range(0..4usize) {
        if rng.random_bool(0.4) {
            let target = record.current_version();
            let action = if target >= 1 && rng.random_bool(0.4) {
                RevisionAction::Revert
            } else {
                *[RevisionAction::AddData, RevisionAction::RemoveData, RevisionAction::Modify]
                    .choose(rng)
                    .unwrap()
            };
            let request = RevisionRequest {
                action,
                target_version: (action == RevisionAction::Revert)
                    .then(|| rng.random_range(1..=target)),
                agent: random_agent(rng),
                timestamp: random_timestamp(rng),
                note: None,
            };
            record = record.with_revision(request).unwrap();
        } else {
            clock = Timestamp::from_datetime(
                clock.datetime() + chrono::Duration::seconds(rng.random_range(1..10_000)),
            );
            let kinds = [
                EventType::Cleaning,
                EventType::Denoising,
                EventType::Resizing,
                EventType::Cropping,
                EventType::Normalization,
                EventType::Labeling,
                EventType::FeatureSelection,
                EventType::Other,
            ];
            let mut params = ScalarMap::new();
            if rng.random_bool(0.5) {
                params.insert("factor".into(), random_scalar(rng));
            }
            let event = TransformationEvent::new(
                *kinds.choose(rng).unwrap(),
                random_agent(rng),
                clock,
            )
            .with_params(params);
            let (next, _) = record.with_transformation(event, Mode::Strict).unwrap();
            record = next;
        }
    }
    record
}

// ---------------------------------------------------------------------------
// Container generation (built with the reference CRC, not the crate's)
// ---------------------------------------------------------------------------

pub const PNG_SIGNATURE: [u8; 8] = [0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A];

pub fn png_chunk(chunk_type: &[u8; 4], data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() + 12);
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(chunk_type);
    out.extend_from_slice(data);
    let mut crc_input = chunk_type.to_vec();
    crc_input.extend_from_slice(data);
    out.extend_from_slice(&reference::crc32(&crc_input).to_be_bytes());
    out
}

/// A container-valid PNG with 1–2 IDAT chunks of random bytes and an
/// occasional ancillary chunk.
pub fn random_png(rng: &mut impl Rng) -> Vec<u8> {
    let mut out = PNG_SIGNATURE.to_vec();
    let mut ihdr = Vec::new();
    ihdr.extend_from_slice(&rng.random_range(1..64u32).to_be_bytes());
    ihdr.extend_from_slice(&rng.random_range(1..64u32).to_be_bytes());
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]);
    out.extend_from_slice(&png_chunk(b"IHDR", &ihdr));
    if rng.random_bool(0.3) {
        let mut text = b"Software\0".to_vec();
        text.extend_from_slice(b"generator");
        out.extend_from_slice(&png_chunk(b"tEXt", &text));
    }
    for _ in 0..rng.random_range(1..3usize) {
        let len = rng.random_range(1..64usize);
        let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        out.extend_from_slice(&png_chunk(b"IDAT", &data));
    }
    out.extend_from_slice(&png_chunk(b"IEND", &[]));
    out
}

/// A container-valid JPEG: SOI, optional APP0/DQT, SOS with marker-free
/// scan bytes, EOI.
pub fn random_jpeg(rng: &mut impl Rng) -> Vec<u8> {
    let mut out = vec![0xFF, 0xD8];
    if rng.random_bool(0.7) {
        out.extend_from_slice(&[0xFF, 0xE0, 0x00, 0x07]);
        out.extend_from_slice(b"JFIF\0");
    }
    if rng.random_bool(0.4) {
        let len = rng.random_range(1..32usize);
        out.extend_from_slice(&[0xFF, 0xDB]);
        out.extend_from_slice(&((len + 2) as u16).to_be_bytes());
        out.extend((0..len).map(|_| rng.random::<u8>()));
    }
    out.extend_from_slice(&[0xFF, 0xDA, 0x00, 0x04, 0x01, 0x00]);
    let scan_len = rng.random_range(4..128usize);
    out.extend((0..scan_len).map(|_| rng.random::<u8>() & 0x7F));
    out.extend_from_slice(&[0xFF, 0xD9]);
    out
}

// ---------------------------------------------------------------------------
// Query generation
// ---------------------------------------------------------------------------

fn random_path(rng: &mut impl Rng) -> Path {
    let pool: &[&[PathSegment]] = &[
        &[PathSegment::Key("name".into())],
        &[PathSegment::Key("split".into())],
        &[PathSegment::Key("fidelity".into())],
        &[PathSegment::Key("methodOfCollection".into())],
        &[PathSegment::Key("dateCreated".into())],
        &[PathSegment::Key("encodingFormat".into())],
        &[PathSegment::Key("contentDigest".into())],
        &[
            PathSegment::Key("flux:parameters".into()),
            PathSegment::Key("steps".into()),
        ],
        &[
            PathSegment::Key("flux:parameters".into()),
            PathSegment::Key("sampler".into()),
        ],
        &[
            PathSegment::Key("flux:parameters".into()),
            PathSegment::Key("seed".into()),
        ],
        &[
            PathSegment::Key("annotations".into()),
            PathSegment::Wildcard,
            PathSegment::Key("class".into()),
        ],
        &[
            PathSegment::Key("annotations".into()),
            PathSegment::Wildcard,
            PathSegment::Key("bbox".into()),
            PathSegment::Wildcard,
        ],
        &[
            PathSegment::Key("requirements".into()),
            PathSegment::Wildcard,
            PathSegment::Key("description".into()),
        ],
        &[
            PathSegment::Key("dataset".into()),
            PathSegment::Key("classProportions".into()),
            PathSegment::Key("Dog".into()),
        ],
        &[
            PathSegment::Key("transformations".into()),
            PathSegment::Wildcard,
            PathSegment::Key("eventType".into()),
        ],
        &[PathSegment::Key("nonexistent".into()), PathSegment::Key("path".into())],
        &[PathSegment::Key("captureMetadata".into()), PathSegment::Key("contrast".into())],
    ];
    Path {
        segments: pool.choose(rng).unwrap().to_vec(),
    }
}

fn random_literal(rng: &mut impl Rng, ordering: bool) -> Literal {
    if ordering {
        if rng.random_bool(0.25) {
            Literal::Str("2023-06-01T00:00:00Z".into())
        } else {
            Literal::Num(*[0.0, 1.0, 4.0, 10.0, 100.0, 512.0, 0.5].choose(rng).unwrap())
        }
    } else {
        match rng.random_range(0..3) {
            0 => Literal::Str(
                [
                    "Dog", "Cat", "training", "testing", "real", "synthetic", "flux",
                    "camera", "image/png", "euler_ancestral", "resizing", "park",
                ]
                .choose(rng)
                .unwrap()
                .to_string(),
            ),
            1 => Literal::Num(*[0.0, 1.0, 4.0, 24.0, 1024.0, 0.25].choose(rng).unwrap()),
            _ => Literal::Bool(rng.random_bool(0.5)),
        }
    }
}

/// A random filter expression of bounded depth, valid per the grammar
/// (ordering operators only get numeric or timestamp literals).
pub fn random_query(rng: &mut impl Rng, depth: usize) -> QueryExpr {
    if depth == 0 || rng.random_bool(0.55) {
        if rng.random_bool(0.2) {
            return QueryExpr::Exists(random_path(rng));
        }
        let op = *[
            CompareOp::Eq,
            CompareOp::Ne,
            CompareOp::Lt,
            CompareOp::Le,
            CompareOp::Gt,
            CompareOp::Ge,
            CompareOp::Contains,
        ]
        .choose(rng)
        .unwrap();
        return QueryExpr::Compare {
            path: random_path(rng),
            op,
            literal: random_literal(rng, op.is_ordering()),
        };
    }
    match rng.random_range(0..3) {
        0 => QueryExpr::Not(Box::new(random_query(rng, depth - 1))),
        1 => {
            let n = rng.random_range(2..4usize);
            QueryExpr::And((0..n).map(|_| random_query(rng, depth - 1)).collect())
        }
        _ => {
            let n = rng.random_range(2..4usize);
            QueryExpr::Or((0..n).map(|_| random_query(rng, depth - 1)).collect())
        }
    }
}
