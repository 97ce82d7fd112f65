"""
URL configuration for the Vortices app.

Staff endpoints:
- /runs/                              - Run registry (JSON)
- /runs/<run_id>/manifest/            - Run manifest (JSON)
- /runs/<run_id>/seeds/<seed>/csv/    - Diagnostics CSV export
- /runs/<run_id>/report/              - Confinement report (JSON)
"""

from django.urls import path
from . import views

app_name = 'vortices'

urlpatterns = [
    path('runs/', views.run_list, name='run_list'),
    path('runs/<int:run_id>/manifest/', views.run_manifest, name='run_manifest'),
    path('runs/<int:run_id>/seeds/<int:seed>/csv/', views.export_diagnostics_csv, name='export_diagnostics_csv'),
    path('runs/<int:run_id>/report/', views.run_report, name='run_report'),
]
