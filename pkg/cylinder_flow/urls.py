"""
URL configuration for cylinder_flow project.

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/5.0/topics/http/urls/
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    # Django admin
    path('admin/', admin.site.urls),

    # Run registry - listings, manifests, diagnostics exports
    path('', include('vortices.urls')),
]

# Customize admin site
admin.site.site_header = "Cylinder Flow Admin"
admin.site.site_title = "Cylinder Flow"
admin.site.index_title = "Simulation Run Registry"
