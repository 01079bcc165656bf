from django.urls import path

from .views import validate_snapshot

urlpatterns = [
    path("validate-snapshot/", validate_snapshot, name="validate_snapshot"),
]
