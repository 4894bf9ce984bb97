//! The 12-class panoptic taxonomy for aerial traffic scenes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-pixel semantic class. The numeric value is the pixel value stored in
/// 8-bit class-map images.
///
/// The first four classes are uncountable background ("stuff"); the
/// remaining eight are countable objects ("things") that carry instance
/// ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum ClassId {
    Environment = 0,
    Street = 1,
    Trees = 2,
    Houses = 3,
    Barriers = 4,
    Poles = 5,
    Obstacles = 6,
    Cars = 7,
    Trucks = 8,
    Motorbikes = 9,
    Bikes = 10,
    Pedestrians = 11,
}

impl ClassId {
    pub const ALL: [ClassId; 12] = [
        ClassId::Environment,
        ClassId::Street,
        ClassId::Trees,
        ClassId::Houses,
        ClassId::Barriers,
        ClassId::Poles,
        ClassId::Obstacles,
        ClassId::Cars,
        ClassId::Trucks,
        ClassId::Motorbikes,
        ClassId::Bikes,
        ClassId::Pedestrians,
    ];

    /// The eight countable classes, in id order.
    pub const COUNTABLE: [ClassId; 8] = [
        ClassId::Barriers,
        ClassId::Poles,
        ClassId::Obstacles,
        ClassId::Cars,
        ClassId::Trucks,
        ClassId::Motorbikes,
        ClassId::Bikes,
        ClassId::Pedestrians,
    ];

    pub fn from_u8(v: u8) -> Option<ClassId> {
        ClassId::ALL.get(v as usize).copied()
    }

    /// Like [`ClassId::from_u8`], but reports the offending pixel on failure.
    pub fn from_pixel_value(v: u8, col: usize, row: usize) -> Result<ClassId> {
        ClassId::from_u8(v).ok_or_else(|| {
            Error::Label(format!(
                "unknown class value {v} at pixel ({col}, {row}); valid ids are 0..=11"
            ))
        })
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Whether this is a countable ("thing") class that carries instances.
    pub fn is_countable(self) -> bool {
        self as u8 >= ClassId::Barriers as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Environment => "environment",
            ClassId::Street => "street",
            ClassId::Trees => "trees",
            ClassId::Houses => "houses",
            ClassId::Barriers => "barriers",
            ClassId::Poles => "poles",
            ClassId::Obstacles => "obstacles",
            ClassId::Cars => "cars",
            ClassId::Trucks => "trucks",
            ClassId::Motorbikes => "motorbikes",
            ClassId::Bikes => "bikes",
            ClassId::Pedestrians => "pedestrians",
        }
    }
}
