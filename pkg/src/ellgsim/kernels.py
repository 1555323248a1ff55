"""Active hot-kernel implementations, chosen by ellgsim.backends."""
from .backends import backend_name, get_kernels

_impl = get_kernels()

csr_matvec = _impl.csr_matvec
cross_term_triplets = _impl.cross_term_triplets
reduce_frame_triplets = _impl.reduce_frame_triplets

ACTIVE_BACKEND = backend_name()
