"""
URL configuration for the PhaseLab project.

The numerical work is driven from manage.py commands; over HTTP the project
only exposes the snapshot validation endpoint of the wigner app.
"""
from django.urls import include, path


urlpatterns = [
    path("", include("wigner.urls")),
]
