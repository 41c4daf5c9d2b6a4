import pytest

from fsra.mpad import available_backends, get_backend


@pytest.fixture(params=available_backends())
def kernels(request):
    """Each kernel backend that is importable on this machine."""
    return get_backend(request.param)
