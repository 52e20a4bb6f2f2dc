# Test collection wiring: configure Django for pytest the way `manage.py test`
# does (settings module, test environment, throwaway test databases).
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ingestbench.settings')
django.setup()

import pytest  # noqa: E402
from django.test.utils import (  # noqa: E402
    setup_databases,
    setup_test_environment,
    teardown_databases,
    teardown_test_environment,
)


@pytest.fixture(scope='session', autouse=True)
def _django_test_databases():
    setup_test_environment()
    old_config = setup_databases(verbosity=0, interactive=False)
    yield
    teardown_databases(old_config, verbosity=0)
    teardown_test_environment()
