# -*- coding: utf-8 -*-
"""Loopback external transport coder.

Implements the framed stdin/stdout wire protocol from FORMAT.md and echoes
every frame back unchanged (zero latency), which makes the external-coder
path bit-exact.  Used by the protocol conformance tests and handy as a
template for wrapping a real perceptual coder:

    hoac encode in.wav out.hoac --coder external \
        --coder-cmd "python -m hoac.stub_coder"
"""
import sys


def main():
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    hello = stdin.readline().decode("ascii", "replace").split()
    if len(hello) != 5 or hello[0] != "HOAC-TC1" \
            or hello[1] not in ("encode", "decode"):
        sys.exit(2)
    stdout.write(b"OK 0\n")
    stdout.flush()
    while True:
        header = stdin.read(4)
        if len(header) < 4:
            break
        n = int.from_bytes(header, "little")
        if n == 0:
            break
        payload = b""
        while len(payload) < n:
            chunk = stdin.read(n - len(payload))
            if not chunk:
                sys.exit(3)
            payload += chunk
        stdout.write(len(payload).to_bytes(4, "little"))
        stdout.write(payload)
        stdout.flush()


if __name__ == "__main__":
    main()
