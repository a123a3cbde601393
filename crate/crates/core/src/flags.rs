use std::fmt;

/// Per-vertex status byte shared by caustic sheets, fronts and mesh output.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Flags(pub u8);

impl Flags {
    pub const VALID: u8 = 1 << 0;
    pub const SHADOW: u8 = 1 << 1;
    pub const GRAZING: u8 = 1 << 2;
    pub const AT_INFINITY: u8 = 1 << 3;
    pub const CLIPPED: u8 = 1 << 4;
    pub const EXCLUDED_ZERO_ROOT: u8 = 1 << 5;
    /// Reflected front has not reached this point yet (negative travel).
    pub const NOT_ARRIVED: u8 = 1 << 6;

    pub const fn valid() -> Self {
        Flags(Self::VALID)
    }

    pub const fn only(bit: u8) -> Self {
        Flags(bit)
    }

    pub fn contains(self, bit: u8) -> bool {
        self.0 & bit != 0
    }

    pub fn is_valid(self) -> bool {
        self.contains(Self::VALID)
    }

    /// Mark invalid for the given reason.
    pub fn invalidate(&mut self, reason: u8) {
        self.0 = (self.0 & !Self::VALID) | reason;
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl fmt::Debug for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [(u8, &str); 7] = [
            (Flags::VALID, "valid"),
            (Flags::SHADOW, "shadow"),
            (Flags::GRAZING, "grazing"),
            (Flags::AT_INFINITY, "at_infinity"),
            (Flags::CLIPPED, "clipped"),
            (Flags::EXCLUDED_ZERO_ROOT, "excluded_zero_root"),
            (Flags::NOT_ARRIVED, "not_arrived"),
        ];
        let set: Vec<&str> = NAMES
            .iter()
            .filter(|(b, _)| self.contains(*b))
            .map(|(_, n)| *n)
            .collect();
        write!(f, "Flags({})", set.join("|"))
    }
}
