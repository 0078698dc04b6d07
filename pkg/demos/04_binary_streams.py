"""Learning from growing prefixes of a binary stream.

Each method sees the first n bits and returns a conclusion, W meaning "no
commitment".  Compare the verifier for "a zero occurs" (fires once, never
retracts) with the limiting verifier for "the stream is all zeros" (holds
its guess until refuted) and with the piecewise method for "eventually all
zeros", whose conjecture names the position after the last one.

Run:  python3 demos/04_binary_streams.py
"""
from statverify.propositional import EXAMPLES, Stream, simulate_inquiry

streams = ["1110(1)", "000...", "010101...", "10010(0)"]
for name, (make, expect) in EXAMPLES.items():
    method = make()
    print(f"\n{name}")
    for lit in streams:
        w = Stream.parse(lit)
        outs = simulate_inquiry(w, method, 12)
        trace = " ".join(o if o != "W" else "." for o in outs)
        print(f"  {str(w):>10}: {trace}    (limit {expect(w)})")
