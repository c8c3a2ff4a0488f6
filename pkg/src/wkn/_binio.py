"""Little-endian binary reading with offset-aware errors."""

import struct


class Reader:
    """Wraps a binary stream; every short read reports the failing offset."""

    def __init__(self, f):
        self.f = f
        self.offset = 0

    def read(self, n, what):
        data = self.f.read(n)
        if len(data) != n:
            raise ValueError(
                f"truncated file: needed {n} bytes for {what} at offset {self.offset}, "
                f"got {len(data)}"
            )
        self.offset += n
        return data

    def u8(self, what):
        return self.read(1, what)[0]

    def u16(self, what):
        return struct.unpack("<H", self.read(2, what))[0]

    def u32(self, what):
        return struct.unpack("<I", self.read(4, what))[0]

    def u64(self, what):
        return struct.unpack("<Q", self.read(8, what))[0]

    def at_eof(self):
        probe = self.f.read(1)
        if probe:
            self.f.seek(-1, 1)
            return False
        return True
