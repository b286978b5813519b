"""
Out-of-order feedback and the Taa watermark
===========================================

A source sends RM cell C1 while a far switch is underloaded, then C2 just
as a nearby switch becomes overloaded. The nearby switch answers C2 at
once with a backward notification, so the source halves its rate long
before C1 completes its round trip. When C1 finally arrives it carries
stale news and must not undo the decrease.
"""

from osuabr.out_of_order import replay

for guard in (True, False):
    print(f"--- stale-feedback guard {'on' if guard else 'off'}")
    for t, label, tcr in replay(taa_guard=guard).events:
        print(f"  t={t:10.1f} us  {label:8s} -> TCR {tcr:6.1f}")
