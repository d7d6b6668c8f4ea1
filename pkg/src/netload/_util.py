import gc
from contextlib import contextmanager


@contextmanager
def bulk_allocation():
    """Pause the cyclic GC across an allocation storm.

    The bulk loops in this package (trace execution, pcap reading) allocate
    one small object per frame and create no reference cycles; letting the
    collector run mid-loop makes it rescan an ever-growing survivor set,
    which turns linear work quadratic-ish on large heaps. Normal collection
    resumes on exit.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()
